#pragma once

#include "conjnli/error.hpp"
#include "conjnli/label.hpp"
#include "conjnli/text.hpp"
#include "conjnli/treebank.hpp"
#include "conjnli/conjunct.hpp"
#include "conjnli/pairgen.hpp"
#include "conjnli/labeler.hpp"
#include "conjnli/toy_classifier.hpp"
#include "conjnli/iaft.hpp"
#include "conjnli/srl.hpp"
#include "conjnli/fusion.hpp"
#include "conjnli/evalkit.hpp"
#include "conjnli/annotate.hpp"
