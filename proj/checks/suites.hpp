#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace erx::checks {

struct SuiteResult {
    std::string name;
    bool pass = false;
    /// Worst observed value of the suite's main metric, and its bound.
    double measured = 0.0;
    double tolerance = 0.0;
    double seconds = 0.0;
    /// Wall-clock limit; 0 means none.
    double budget_seconds = 0.0;
    std::string detail;
};

// Oracle and property suites, also exposed by `erx check`.
SuiteResult prox_oracle_suite(std::uint64_t seed = 1, std::size_t instances = 100);
SuiteResult epigraph_oracle_suite(std::uint64_t seed = 2, std::size_t instances = 200);
SuiteResult lambda_star_suite(std::uint64_t seed = 3, std::size_t instances = 1000);
SuiteResult moreau_suite(std::uint64_t seed = 4, std::size_t trials = 1000);
SuiteResult asnn_shift_suite(std::uint64_t seed = 5, std::size_t instances = 100);
SuiteResult counterexample_suite();
SuiteResult adjoint_suite(std::uint64_t seed = 6);

// Solver experiments.
SuiteResult erx_exactness_experiment();
SuiteResult dstv_degeneracy_experiment(std::uint64_t seed = 8);
SuiteResult cs_comparison_experiment();
SuiteResult rpca_experiment(std::uint64_t base_seed = 1);

/// Names accepted by run_check_suite, in run order.
const std::vector<std::string> &check_suite_names();
/// Throws std::invalid_argument for unknown names.
SuiteResult run_check_suite(const std::string &name);

} // namespace erx::checks
