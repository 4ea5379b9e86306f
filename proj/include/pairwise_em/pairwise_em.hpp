#ifndef PAIRWISE_EM_PAIRWISE_EM_HPP
#define PAIRWISE_EM_PAIRWISE_EM_HPP

#include "pairwise_em/diagnostics.hpp"
#include "pairwise_em/errors.hpp"
#include "pairwise_em/estimators.hpp"
#include "pairwise_em/experiments.hpp"
#include "pairwise_em/linalg.hpp"
#include "pairwise_em/model.hpp"
#include "pairwise_em/rng.hpp"
#include "pairwise_em/version.hpp"

#endif // PAIRWISE_EM_PAIRWISE_EM_HPP
