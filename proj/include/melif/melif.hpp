#ifndef MELIF_MELIF_HPP
#define MELIF_MELIF_HPP

#include "melif/bandit.hpp"
#include "melif/bench.hpp"
#include "melif/classifier.hpp"
#include "melif/common.hpp"
#include "melif/dataset.hpp"
#include "melif/evaluator.hpp"
#include "melif/filters.hpp"
#include "melif/grid.hpp"
#include "melif/halt.hpp"
#include "melif/metrics.hpp"
#include "melif/optim.hpp"
#include "melif/synthetic.hpp"

#endif  // MELIF_MELIF_HPP
