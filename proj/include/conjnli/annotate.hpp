#pragma once

// Two-annotator labeling sessions. Every change is an event appended to a
// per-session JSON-lines journal; session state is a fold over the events.

#include <algorithm>
#include <cctype>
#include <chrono>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <shared_mutex>
#include <string>
#include <vector>

#include "conjnli/error.hpp"
#include "conjnli/evalkit.hpp"
#include "conjnli/label.hpp"
#include "conjnli/util/jsonl.hpp"

namespace conjnli::annotate {

using util::ordered_json;

// Protocol violation, carrying the HTTP status the service reports.
class ServiceError : public Error {
 public:
  ServiceError(int status, std::string code, const std::string& message)
      : Error(message), status_(status), code_(std::move(code)) {}
  int status() const { return status_; }
  const std::string& code() const { return code_; }

 private:
  int status_;
  std::string code_;
};

inline ServiceError bad_request(const std::string& m) { return {400, "bad_request", m}; }
inline ServiceError not_found(const std::string& m) { return {404, "not_found", m}; }
inline ServiceError conflict(const std::string& m) { return {409, "conflict", m}; }
inline ServiceError out_of_round(const std::string& m) { return {409, "out_of_round", m}; }

enum class Round { One, Two, Closed };

inline std::string_view to_string(Round r) {
  switch (r) {
    case Round::One: return "one";
    case Round::Two: return "two";
    case Round::Closed: return "closed";
  }
  return "one";
}

inline constexpr std::string_view kUngrammatical = "ungrammatical";
inline constexpr std::string_view kDiscard = "discard";

inline bool valid_verdict(const std::string& v) { return v == kUngrammatical || try_parse_label(v).has_value(); }

inline std::string canonical_verdict(const std::string& v) {
  if (v == kUngrammatical) return v;
  if (auto l = try_parse_label(v)) return std::string(to_string(*l));
  throw bad_request("verdict must be entailment, neutral, contradiction or ungrammatical, got '" + v + "'");
}

struct Record {
  std::string verdict;
  std::string ts;
  friend bool operator==(const Record&, const Record&) = default;
};

struct SessionState {
  std::string session_id;
  std::vector<std::string> annotators;
  std::vector<ordered_json> pairs;
  std::vector<std::string> pair_ids;
  std::vector<ordered_json> warmup;
  // round -> pair index -> annotator -> record
  std::map<int, std::map<std::size_t, std::map<std::string, Record>>> records;
  // pair index -> label, or nullopt for discard
  std::map<std::size_t, std::optional<Label>> resolutions;
  bool closed = false;
  std::size_t events = 0;

  friend bool operator==(const SessionState&, const SessionState&) = default;

  std::optional<std::size_t> index_of(const std::string& pair_id) const {
    for (std::size_t i = 0; i < pair_ids.size(); ++i)
      if (pair_ids[i] == pair_id) return i;
    return std::nullopt;
  }

  bool has_annotator(const std::string& a) const {
    return std::find(annotators.begin(), annotators.end(), a) != annotators.end();
  }

  const Record* record(int round, std::size_t pair, const std::string& annotator) const {
    auto r = records.find(round);
    if (r == records.end()) return nullptr;
    auto p = r->second.find(pair);
    if (p == r->second.end()) return nullptr;
    auto a = p->second.find(annotator);
    return a == p->second.end() ? nullptr : &a->second;
  }

  std::size_t round_one_count() const {
    auto r = records.find(1);
    if (r == records.end()) return 0;
    std::size_t n = 0;
    for (const auto& [pair, by] : r->second) n += by.size();
    return n;
  }

  std::size_t pending_round_one() const { return 2 * pairs.size() - round_one_count(); }
  bool round_one_complete() const { return pending_round_one() == 0; }

  Round round() const {
    if (closed) return Round::Closed;
    return round_one_complete() ? Round::Two : Round::One;
  }

  bool ungrammatical(std::size_t i) const {
    for (const auto& a : annotators)
      if (const auto* r = record(1, i, a); r && r->verdict == kUngrammatical) return true;
    return false;
  }

  // Both round-one verdicts present, both labels, and different.
  bool disagreed(std::size_t i) const {
    const auto* a = record(1, i, annotators[0]);
    const auto* b = record(1, i, annotators[1]);
    return a && b && !ungrammatical(i) && a->verdict != b->verdict;
  }

  std::vector<std::size_t> disagreements() const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < pairs.size(); ++i)
      if (disagreed(i)) out.push_back(i);
    return out;
  }
};

namespace detail {

inline std::string require_string(const ordered_json& j, const char* key) {
  if (!j.contains(key) || !j[key].is_string() || j[key].get<std::string>().empty())
    throw bad_request(std::string("field '") + key + "' must be a non-empty string");
  return j[key].get<std::string>();
}

inline bool safe_id(const std::string& s) {
  if (s.empty() || s.size() > 128) return false;
  for (unsigned char c : s)
    if (!std::isalnum(c) && c != '-' && c != '_' && c != '.') return false;
  return s.front() != '.';
}

}  // namespace detail

// Validates an event against the state and applies it. Returns false when
// the event is an exact repeat that changes nothing (not journaled).
inline bool apply_event(SessionState& st, const ordered_json& ev) {
  const std::string type = detail::require_string(ev, "type");
  const std::string ts = ev.value("ts", std::string{});

  if (type == "create") {
    if (st.events != 0) throw conflict("session already created");
    st.session_id = detail::require_string(ev, "session_id");
    if (!detail::safe_id(st.session_id)) throw bad_request("session id may use letters, digits, '-', '_' and '.'");
    if (!ev.contains("annotators") || !ev["annotators"].is_array()) throw bad_request("annotators must be a list");
    st.annotators = ev["annotators"].get<std::vector<std::string>>();
    if (st.annotators.size() != 2 || st.annotators[0] == st.annotators[1] || st.annotators[0].empty() ||
        st.annotators[1].empty())
      throw bad_request("a session needs exactly two distinct annotators");
    if (!ev.contains("pairs") || !ev["pairs"].is_array() || ev["pairs"].empty())
      throw bad_request("a session needs at least one pair");
    std::set<std::string> ids;
    for (std::size_t i = 0; i < ev["pairs"].size(); ++i) {
      const auto& p = ev["pairs"][i];
      if (!p.is_object() || !p.contains("premise") || !p.contains("hypothesis"))
        throw bad_request("pair " + std::to_string(i) + " needs premise and hypothesis");
      std::string id = p.contains("id") ? (p["id"].is_string() ? p["id"].get<std::string>() : p["id"].dump())
                                        : "p" + std::to_string(i);
      if (!ids.insert(id).second) throw bad_request("duplicate pair id '" + id + "'");
      st.pair_ids.push_back(id);
      st.pairs.push_back(p);
    }
    if (ev.contains("warmup") && ev["warmup"].is_array())
      for (const auto& w : ev["warmup"]) st.warmup.push_back(w);
    ++st.events;
    return true;
  }

  if (st.events == 0) throw not_found("session not created");

  if (type == "label") {
    const std::string annotator = detail::require_string(ev, "annotator");
    if (!st.has_annotator(annotator)) throw not_found("unknown annotator '" + annotator + "'");
    const std::string pair_id = detail::require_string(ev, "pair_id");
    const auto idx = st.index_of(pair_id);
    if (!idx) throw not_found("unknown pair '" + pair_id + "'");
    const std::string verdict = canonical_verdict(detail::require_string(ev, "verdict"));
    const Round round = st.round();
    if (round == Round::Closed) throw out_of_round("session is closed");

    auto submit = [&](int r) {
      if (const auto* existing = st.record(r, *idx, annotator)) {
        if (existing->verdict == verdict) return false;
        throw conflict("pair '" + pair_id + "' already labeled '" + existing->verdict + "' by " + annotator +
                       " in round " + std::to_string(r));
      }
      st.records[r][*idx][annotator] = Record{verdict, ts};
      ++st.events;
      return true;
    };

    const int requested = ev.value("round", round == Round::One ? 1 : 2);
    if (round == Round::One) {
      if (requested != 1) throw out_of_round("round two has not started");
      return submit(1);
    }
    if (requested == 2 && st.disagreed(*idx)) return submit(2);
    // Late retry of an identical round-one verdict.
    if (const auto* r1 = st.record(1, *idx, annotator); r1 && r1->verdict == verdict) return false;
    throw out_of_round("pair '" + pair_id + "' is not open for labeling in round two");
  }

  if (type == "resolution") {
    if (st.round() != Round::Two) throw out_of_round("resolutions are recorded in round two");
    const std::string pair_id = detail::require_string(ev, "pair_id");
    const auto idx = st.index_of(pair_id);
    if (!idx) throw not_found("unknown pair '" + pair_id + "'");
    if (!st.disagreed(*idx)) throw out_of_round("pair '" + pair_id + "' is not a round-one disagreement");
    const std::string verdict = detail::require_string(ev, "verdict");
    std::optional<Label> value;
    if (verdict != kDiscard) {
      value = try_parse_label(verdict);
      if (!value) throw bad_request("resolution must be a label or 'discard'");
    }
    if (auto it = st.resolutions.find(*idx); it != st.resolutions.end()) {
      if (it->second == value) return false;
      throw conflict("pair '" + pair_id + "' already resolved");
    }
    st.resolutions[*idx] = value;
    ++st.events;
    return true;
  }

  if (type == "close") {
    if (st.closed) return false;
    if (st.round() != Round::Two) throw out_of_round("round one is incomplete");
    std::size_t unresolved = 0;
    for (auto i : st.disagreements()) unresolved += !st.resolutions.count(i);
    if (unresolved) throw conflict(std::to_string(unresolved) + " disagreement(s) unresolved");
    st.closed = true;
    ++st.events;
    return true;
  }

  throw bad_request("unknown event type '" + type + "'");
}

struct ReplayResult {
  SessionState state;
  std::uintmax_t valid_bytes = 0;  // journal prefix holding complete events
  bool torn_tail = false;
};

// Folds journal text into state. A final fragment without a newline is kept
// only if it parses; any other bad line is corruption.
inline ReplayResult replay(const std::string& journal) {
  ReplayResult out;
  std::size_t pos = 0;
  while (pos < journal.size()) {
    const auto nl = journal.find('\n', pos);
    const bool complete = nl != std::string::npos;
    const std::string line = journal.substr(pos, complete ? nl - pos : std::string::npos);
    ordered_json ev;
    try {
      ev = ordered_json::parse(line);
    } catch (const nlohmann::json::parse_error&) {
      if (!complete) {
        out.torn_tail = true;
        break;
      }
      throw Error("journal corrupt at byte " + std::to_string(pos));
    }
    apply_event(out.state, ev);
    pos = complete ? nl + 1 : journal.size();
    out.valid_bytes = pos;
  }
  return out;
}

inline std::string utc_now() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

// Pair as shown to annotators: stored labels removed.
inline ordered_json pair_view(const SessionState& st, std::size_t i) {
  ordered_json p = st.pairs[i];
  p.erase("label");
  p.erase("label_source");
  p["id"] = st.pair_ids[i];
  return p;
}

struct Export {
  LabeledDataset dataset;
  std::vector<std::string> discarded;
  std::vector<std::string> ungrammatical;

  ordered_json sidecar() const {
    ordered_json j;
    j["discarded"] = discarded;
    j["ungrammatical"] = ungrammatical;
    return j;
  }
};

// Agreed and resolved pairs of a closed session, labeled by humans.
inline Export export_agreed(const SessionState& st) {
  if (st.round() != Round::Closed) throw out_of_round("session must be closed before export");
  Export out;
  out.dataset.split = st.session_id;
  for (std::size_t i = 0; i < st.pairs.size(); ++i) {
    if (st.ungrammatical(i)) {
      out.ungrammatical.push_back(st.pair_ids[i]);
      continue;
    }
    std::optional<Label> label;
    if (st.disagreed(i)) {
      label = st.resolutions.at(i);
      if (!label) {
        out.discarded.push_back(st.pair_ids[i]);
        continue;
      }
    } else {
      label = parse_label(st.record(1, i, st.annotators[0])->verdict);
    }
    DatasetRecord r;
    r.id = st.pair_ids[i];
    r.premise = st.pairs[i].at("premise").get<std::string>();
    r.hypothesis = st.pairs[i].at("hypothesis").get<std::string>();
    r.label = *label;
    r.label_source = LabelSource::Human;
    for (const auto& [k, v] : st.pairs[i].items())
      if (!conjnli::detail::core_fields().count(k) && k != "coordination" && k != "flags") r.extra[k] = v;
    out.dataset.records.push_back(std::move(r));
  }
  return out;
}

struct AgreementReport {
  std::optional<double> kappa;
  std::optional<double> p_o;
  std::size_t items = 0;  // grammatical pairs
  std::size_t agreed = 0;
  std::vector<std::string> disagreed_ids;
  std::vector<std::string> ungrammatical_ids;
  std::map<std::string, std::map<std::string, std::size_t>> counts;  // annotator -> label -> n

  ordered_json to_json() const {
    ordered_json j;
    j["kappa"] = kappa ? ordered_json(*kappa) : ordered_json(nullptr);
    j["p_o"] = p_o ? ordered_json(*p_o) : ordered_json(nullptr);
    j["items"] = items;
    j["agreed"] = agreed;
    j["disagreed_ids"] = disagreed_ids;
    j["ungrammatical_ids"] = ungrammatical_ids;
    j["counts"] = counts;
    return j;
  }
};

// Kappa over pairs neither annotator flagged ungrammatical.
inline AgreementReport agreement_report(const SessionState& st) {
  if (!st.round_one_complete()) throw out_of_round("round one is incomplete");
  AgreementReport rep;
  std::vector<Label> a, b;
  for (const auto& who : st.annotators)
    for (auto l : kAllLabels) rep.counts[who][std::string(to_string(l))] = 0;
  for (std::size_t i = 0; i < st.pairs.size(); ++i) {
    if (st.ungrammatical(i)) {
      rep.ungrammatical_ids.push_back(st.pair_ids[i]);
      continue;
    }
    const Label la = parse_label(st.record(1, i, st.annotators[0])->verdict);
    const Label lb = parse_label(st.record(1, i, st.annotators[1])->verdict);
    ++rep.counts[st.annotators[0]][std::string(to_string(la))];
    ++rep.counts[st.annotators[1]][std::string(to_string(lb))];
    a.push_back(la);
    b.push_back(lb);
    if (la == lb)
      ++rep.agreed;
    else
      rep.disagreed_ids.push_back(st.pair_ids[i]);
  }
  rep.items = a.size();
  if (!a.empty()) {
    rep.kappa = cohen_kappa(a, b);
    rep.p_o = static_cast<double>(rep.agreed) / static_cast<double>(rep.items);
  }
  return rep;
}

// Next pair for an annotator in the current round, or a done signal.
inline ordered_json next_pair(const SessionState& st, const std::string& annotator) {
  if (!st.has_annotator(annotator)) throw not_found("unknown annotator '" + annotator + "'");
  ordered_json out;
  const Round round = st.round();
  out["round"] = to_string(round);
  auto progress = [&](int r, std::size_t total) {
    std::size_t done = 0;
    for (std::size_t i = 0; i < st.pairs.size(); ++i) done += st.record(r, i, annotator) != nullptr;
    out["progress"] = {{"done", done}, {"total", total}};
  };
  if (round == Round::One) {
    progress(1, st.pairs.size());
    for (std::size_t i = 0; i < st.pairs.size(); ++i)
      if (!st.record(1, i, annotator)) {
        out["done"] = false;
        out["index"] = i;
        out["pair"] = pair_view(st, i);
        return out;
      }
    out["done"] = true;
    out["waiting"] = true;  // the other annotator has not finished round one
    return out;
  }
  if (round == Round::Two) {
    const auto queue = st.disagreements();
    progress(2, queue.size());
    for (auto i : queue)
      if (!st.record(2, i, annotator) && !st.resolutions.count(i)) {
        out["done"] = false;
        out["index"] = i;
        out["pair"] = pair_view(st, i);
        ordered_json prior;
        for (const auto& who : st.annotators) prior[who] = st.record(1, i, who)->verdict;
        out["round_one_labels"] = prior;
        return out;
      }
  }
  out["done"] = true;
  out["waiting"] = false;
  return out;
}

// Sessions persisted as <dir>/<id>.jsonl. Writes to one session are
// serialized; reads share the lock.
class SessionStore {
 public:
  using Clock = std::function<std::string()>;

  explicit SessionStore(std::filesystem::path dir, Clock clock = utc_now)
      : dir_(std::move(dir)), clock_(std::move(clock)) {
    std::filesystem::create_directories(dir_);
  }

  const std::filesystem::path& dir() const { return dir_; }

  std::filesystem::path journal_path(const std::string& id) const { return dir_ / (id + ".jsonl"); }

  std::string create_session(const std::string& id, const std::vector<std::string>& annotators,
                             const std::vector<ordered_json>& pairs, const std::vector<ordered_json>& warmup = {}) {
    ordered_json ev;
    ev["type"] = "create";
    ev["session_id"] = id;
    ev["annotators"] = annotators;
    ev["pairs"] = pairs;
    ev["warmup"] = warmup;
    ev["ts"] = clock_();

    std::unique_lock lock(store_mutex_);
    if (!detail::safe_id(id)) throw bad_request("session id may use letters, digits, '-', '_' and '.'");
    if (sessions_.count(id) || std::filesystem::exists(journal_path(id)))
      throw conflict("session '" + id + "' already exists");
    auto h = std::make_unique<Handle>();
    apply_event(h->state, ev);
    append(id, ev);
    sessions_[id] = std::move(h);
    return id;
  }

  // Runs a read-only function on a consistent snapshot of the state.
  template <typename F>
  auto read(const std::string& id, F&& f) {
    Handle& h = handle(id);
    std::shared_lock lock(h.mutex);
    return f(static_cast<const SessionState&>(h.state));
  }

  SessionState state(const std::string& id) {
    return read(id, [](const SessionState& s) { return s; });
  }

  // Returns true if the event was journaled, false for an idempotent repeat.
  bool submit(const std::string& id, ordered_json ev) {
    Handle& h = handle(id);
    std::unique_lock lock(h.mutex);
    ev["ts"] = clock_();
    SessionState next = h.state;
    if (!apply_event(next, ev)) return false;
    append(id, ev);
    h.state = std::move(next);
    return true;
  }

  bool submit_label(const std::string& id, const std::string& annotator, const std::string& pair_id,
                    const std::string& verdict) {
    // Round is stamped by the state at submission time.
    const int round = read(id, [](const SessionState& s) { return s.round() == Round::One ? 1 : 2; });
    return submit(id, {{"type", "label"}, {"annotator", annotator}, {"pair_id", pair_id},
                       {"verdict", verdict}, {"round", round}});
  }

  bool resolve(const std::string& id, const std::string& pair_id, const std::string& verdict) {
    return submit(id, {{"type", "resolution"}, {"pair_id", pair_id}, {"verdict", verdict}});
  }

  bool close(const std::string& id) { return submit(id, {{"type", "close"}}); }

  std::vector<std::string> list() {
    std::unique_lock lock(store_mutex_);
    std::set<std::string> ids;
    for (const auto& [id, h] : sessions_) ids.insert(id);
    for (const auto& e : std::filesystem::directory_iterator(dir_))
      if (e.path().extension() == ".jsonl") ids.insert(e.path().stem().string());
    return {ids.begin(), ids.end()};
  }

 private:
  struct Handle {
    std::shared_mutex mutex;
    SessionState state;
  };

  Handle& handle(const std::string& id) {
    std::unique_lock lock(store_mutex_);
    if (auto it = sessions_.find(id); it != sessions_.end()) return *it->second;
    if (!detail::safe_id(id) || !std::filesystem::exists(journal_path(id)))
      throw not_found("unknown session '" + id + "'");
    auto h = std::make_unique<Handle>();
    const auto path = journal_path(id);
    std::string text;
    {
      std::ifstream in(path, std::ios::binary);
      text.assign(std::istreambuf_iterator<char>(in), {});
    }
    ReplayResult r = replay(text);
    if (r.valid_bytes < text.size()) std::filesystem::resize_file(path, r.valid_bytes);
    if (r.valid_bytes > 0 && text[r.valid_bytes - 1] != '\n') {
      std::ofstream out(path, std::ios::binary | std::ios::app);
      out << '\n';
    }
    h->state = std::move(r.state);
    auto& ref = *h;
    sessions_[id] = std::move(h);
    return ref;
  }

  void append(const std::string& id, const ordered_json& ev) {
    std::ofstream out(journal_path(id), std::ios::binary | std::ios::app);
    if (!out) throw Error("cannot append to journal of session '" + id + "'");
    out << ev.dump() << '\n';
    out.flush();
    if (!out) throw Error("journal write failed for session '" + id + "'");
  }

  std::filesystem::path dir_;
  Clock clock_;
  std::mutex store_mutex_;
  std::map<std::string, std::unique_ptr<Handle>> sessions_;
};

}  // namespace conjnli::annotate
