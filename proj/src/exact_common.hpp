#pragma once

#include <vector>

#include "spincm/models.hpp"

namespace spincm::detail {

/// Shared input checks of the factorization solvers.
void require_exact_preconditions(const ModelSpec& spec, const PhasePoint& pt0, const std::vector<double>& times);

}  // namespace spincm::detail
