#pragma once

// Predicate-aware late fusion over precomputed sentence embeddings: the NLI
// vector is concatenated with 40-dimensional projections of the premise and
// hypothesis SRL vectors and fed to a linear three-way classifier.

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "conjnli/error.hpp"
#include "conjnli/label.hpp"
#include "conjnli/util/jsonl.hpp"
#include "conjnli/util/random.hpp"

namespace conjnli::srl {

inline constexpr Eigen::Index kProjectionDim = 40;
inline constexpr Eigen::Index kNumLabels = 3;

struct EmbeddingTriple {
  std::string id;
  Eigen::VectorXd c_nli;
  Eigen::VectorXd c_p;
  Eigen::VectorXd c_h;
  Label label = Label::Neutral;
};

class FusionHead {
 public:
  FusionHead(Eigen::Index d_nli, Eigen::Index d_p, Eigen::Index d_h)
      : proj_p_w_(Eigen::MatrixXd::Zero(kProjectionDim, d_p)),
        proj_p_b_(Eigen::VectorXd::Zero(kProjectionDim)),
        proj_h_w_(Eigen::MatrixXd::Zero(kProjectionDim, d_h)),
        proj_h_b_(Eigen::VectorXd::Zero(kProjectionDim)),
        cls_w_(Eigen::MatrixXd::Zero(kNumLabels, d_nli + 2 * kProjectionDim)),
        cls_b_(Eigen::VectorXd::Zero(kNumLabels)) {}

  // Small Gaussian weights, zero biases.
  static FusionHead random(Eigen::Index d_nli, Eigen::Index d_p, Eigen::Index d_h, std::uint64_t seed,
                           double scale = 0.1) {
    FusionHead h(d_nli, d_p, d_h);
    util::Rng rng(seed);
    for (Eigen::MatrixXd* m : {&h.proj_p_w_, &h.proj_h_w_, &h.cls_w_})
      for (Eigen::Index i = 0; i < m->size(); ++i) m->data()[i] = scale * rng.normal();
    return h;
  }

  Eigen::Index d_nli() const { return cls_w_.cols() - 2 * kProjectionDim; }
  Eigen::Index d_p() const { return proj_p_w_.cols(); }
  Eigen::Index d_h() const { return proj_h_w_.cols(); }
  Eigen::Index projection_dim() const { return proj_p_w_.rows(); }
  Eigen::Index parameter_count() const {
    return proj_p_w_.size() + proj_p_b_.size() + proj_h_w_.size() + proj_h_b_.size() + cls_w_.size() +
           cls_b_.size();
  }

  Eigen::VectorXd parameters() const {
    Eigen::VectorXd out(parameter_count());
    Eigen::Index at = 0;
    for (const auto& [data, size] : blocks()) {
      out.segment(at, size) = Eigen::Map<const Eigen::VectorXd>(data, size);
      at += size;
    }
    return out;
  }

  void set_parameters(const Eigen::VectorXd& theta) {
    if (theta.size() != parameter_count()) throw Error("parameter vector has the wrong size");
    Eigen::Index at = 0;
    for (const auto& [data, size] : blocks()) {
      Eigen::Map<Eigen::VectorXd>(data, size) = theta.segment(at, size);
      at += size;
    }
  }

  void check_dims(const EmbeddingTriple& x) const {
    if (x.c_nli.size() != d_nli() || x.c_p.size() != d_p() || x.c_h.size() != d_h())
      throw Error("embedding dimensions (" + std::to_string(x.c_nli.size()) + ", " + std::to_string(x.c_p.size()) +
                  ", " + std::to_string(x.c_h.size()) + ") do not match head (" + std::to_string(d_nli()) + ", " +
                  std::to_string(d_p()) + ", " + std::to_string(d_h()) + ")");
  }

  Eigen::VectorXd fused_input(const EmbeddingTriple& x) const {
    check_dims(x);
    Eigen::VectorXd z(cls_w_.cols());
    z << x.c_nli, proj_p_w_ * x.c_p + proj_p_b_, proj_h_w_ * x.c_h + proj_h_b_;
    return z;
  }

  Eigen::VectorXd scores(const EmbeddingTriple& x) const { return cls_w_ * fused_input(x) + cls_b_; }

  Label predict(const EmbeddingTriple& x) const {
    Eigen::Index best;
    scores(x).maxCoeff(&best);
    return static_cast<Label>(best);
  }

  // Cross-entropy of one example; adds its gradient (in parameters() layout)
  // into grad when given.
  double loss(const EmbeddingTriple& x, Eigen::VectorXd* grad = nullptr) const {
    const Eigen::VectorXd z = fused_input(x);
    const Eigen::VectorXd s = cls_w_ * z + cls_b_;
    const double mx = s.maxCoeff();
    const Eigen::VectorXd e = (s.array() - mx).exp().matrix();
    const double norm = e.sum();
    const auto y = static_cast<Eigen::Index>(label_index(x.label));
    const double value = -(s(y) - mx - std::log(norm));
    if (grad) {
      Eigen::VectorXd g = e / norm;
      g(y) -= 1.0;
      const Eigen::VectorXd dz = cls_w_.transpose() * g;
      const Eigen::VectorXd dzp = dz.segment(d_nli(), kProjectionDim);
      const Eigen::VectorXd dzh = dz.segment(d_nli() + kProjectionDim, kProjectionDim);
      Eigen::Index at = 0;
      auto put = [&](const Eigen::MatrixXd& m) {
        grad->segment(at, m.size()) += Eigen::Map<const Eigen::VectorXd>(m.data(), m.size());
        at += m.size();
      };
      put(dzp * x.c_p.transpose());
      put(dzp);
      put(dzh * x.c_h.transpose());
      put(dzh);
      put(g * z.transpose());
      put(g);
    }
    return value;
  }

  util::ordered_json to_json() const {
    auto mat = [](const Eigen::MatrixXd& m) {
      util::ordered_json rows = util::ordered_json::array();
      for (Eigen::Index r = 0; r < m.rows(); ++r) {
        std::vector<double> row(static_cast<std::size_t>(m.cols()));
        for (Eigen::Index c = 0; c < m.cols(); ++c) row[static_cast<std::size_t>(c)] = m(r, c);
        rows.push_back(row);
      }
      return rows;
    };
    util::ordered_json j;
    j["d_nli"] = d_nli();
    j["d_p"] = d_p();
    j["d_h"] = d_h();
    j["proj_p"] = {{"weight", mat(proj_p_w_)}, {"bias", mat(proj_p_b_)}};
    j["proj_h"] = {{"weight", mat(proj_h_w_)}, {"bias", mat(proj_h_b_)}};
    j["classifier"] = {{"weight", mat(cls_w_)}, {"bias", mat(cls_b_)}};
    return j;
  }

  static FusionHead from_json(const util::ordered_json& j) {
    FusionHead h(j.at("d_nli").get<Eigen::Index>(), j.at("d_p").get<Eigen::Index>(), j.at("d_h").get<Eigen::Index>());
    auto load = [](const util::ordered_json& rows, Eigen::MatrixXd& m) {
      if (static_cast<Eigen::Index>(rows.size()) != m.rows()) throw Error("fusion head matrix has wrong row count");
      for (Eigen::Index r = 0; r < m.rows(); ++r) {
        const auto& row = rows.at(static_cast<std::size_t>(r));
        if (static_cast<Eigen::Index>(row.size()) != m.cols()) throw Error("fusion head matrix has wrong column count");
        for (Eigen::Index c = 0; c < m.cols(); ++c) m(r, c) = row.at(static_cast<std::size_t>(c)).get<double>();
      }
    };
    auto load_vec = [&](const util::ordered_json& rows, Eigen::VectorXd& v) {
      Eigen::MatrixXd m(v.size(), 1);
      load(rows, m);
      v = m.col(0);
    };
    load(j.at("proj_p").at("weight"), h.proj_p_w_);
    load_vec(j.at("proj_p").at("bias"), h.proj_p_b_);
    load(j.at("proj_h").at("weight"), h.proj_h_w_);
    load_vec(j.at("proj_h").at("bias"), h.proj_h_b_);
    load(j.at("classifier").at("weight"), h.cls_w_);
    load_vec(j.at("classifier").at("bias"), h.cls_b_);
    return h;
  }

 private:
  // Parameter blocks in gradient layout order.
  std::vector<std::pair<const double*, Eigen::Index>> blocks() const {
    return {{proj_p_w_.data(), proj_p_w_.size()}, {proj_p_b_.data(), proj_p_b_.size()},
            {proj_h_w_.data(), proj_h_w_.size()}, {proj_h_b_.data(), proj_h_b_.size()},
            {cls_w_.data(), cls_w_.size()},       {cls_b_.data(), cls_b_.size()}};
  }
  std::vector<std::pair<double*, Eigen::Index>> blocks() {
    return {{proj_p_w_.data(), proj_p_w_.size()}, {proj_p_b_.data(), proj_p_b_.size()},
            {proj_h_w_.data(), proj_h_w_.size()}, {proj_h_b_.data(), proj_h_b_.size()},
            {cls_w_.data(), cls_w_.size()},       {cls_b_.data(), cls_b_.size()}};
  }

  Eigen::MatrixXd proj_p_w_;
  Eigen::VectorXd proj_p_b_;
  Eigen::MatrixXd proj_h_w_;
  Eigen::VectorXd proj_h_b_;
  Eigen::MatrixXd cls_w_;
  Eigen::VectorXd cls_b_;
};

inline Eigen::VectorXd fuse_predict(const Eigen::VectorXd& c_nli, const Eigen::VectorXd& c_p,
                                    const Eigen::VectorXd& c_h, const FusionHead& head) {
  return head.scores(EmbeddingTriple{"", c_nli, c_p, c_h, Label::Neutral});
}

// Mean cross-entropy over a dataset, with its gradient.
inline double mean_loss(const FusionHead& head, std::span<const EmbeddingTriple> data, Eigen::VectorXd* grad) {
  if (data.empty()) throw PreconditionError("empty embedding dataset");
  if (grad) grad->setZero(head.parameter_count());
  double total = 0.0;
  for (const auto& x : data) total += head.loss(x, grad);
  const double n = static_cast<double>(data.size());
  if (grad) *grad /= n;
  return total / n;
}

struct FusionTrainConfig {
  std::size_t steps = 500;
  double learning_rate = 0.05;
  std::uint64_t seed = 42;
};

// Full-batch Adam on the mean cross-entropy. Returns the final loss.
inline double fit_fusion_head(FusionHead& head, std::span<const EmbeddingTriple> data,
                              const FusionTrainConfig& config = {}) {
  constexpr double kBeta1 = 0.9, kBeta2 = 0.999, kEps = 1e-8;
  Eigen::VectorXd theta = head.parameters();
  Eigen::VectorXd m = Eigen::VectorXd::Zero(theta.size());
  Eigen::VectorXd v = Eigen::VectorXd::Zero(theta.size());
  Eigen::VectorXd grad;
  for (std::size_t step = 1; step <= config.steps; ++step) {
    mean_loss(head, data, &grad);
    m = kBeta1 * m + (1 - kBeta1) * grad;
    v = kBeta2 * v + (1 - kBeta2) * grad.cwiseAbs2();
    const double c1 = 1 - std::pow(kBeta1, static_cast<double>(step));
    const double c2 = 1 - std::pow(kBeta2, static_cast<double>(step));
    theta.array() -= config.learning_rate * (m.array() / c1) / ((v.array() / c2).sqrt() + kEps);
    head.set_parameters(theta);
  }
  return mean_loss(head, data, nullptr);
}

inline double fusion_accuracy(const FusionHead& head, std::span<const EmbeddingTriple> data) {
  if (data.empty()) throw PreconditionError("empty embedding dataset");
  std::size_t hit = 0;
  for (const auto& x : data) hit += head.predict(x) == x.label;
  return static_cast<double>(hit) / static_cast<double>(data.size());
}

inline std::vector<EmbeddingTriple> load_embeddings(const std::filesystem::path& path) {
  std::vector<EmbeddingTriple> out;
  std::size_t line = 0;
  for (const auto& j : util::read_jsonl(path)) {
    ++line;
    auto vec = [&](const char* key) {
      const auto v = j.at(key).get<std::vector<double>>();
      return Eigen::VectorXd(Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size())));
    };
    try {
      EmbeddingTriple t;
      t.id = j.contains("id") ? (j["id"].is_string() ? j["id"].get<std::string>() : j["id"].dump())
                              : std::to_string(line);
      t.c_nli = vec("c_nli");
      t.c_p = vec("c_p");
      t.c_h = vec("c_h");
      t.label = parse_label(j.at("label").get<std::string>());
      out.push_back(std::move(t));
    } catch (const std::exception& e) {
      throw FormatError(std::string("bad embedding record: ") + e.what(), line);
    }
  }
  return out;
}

}  // namespace conjnli::srl
