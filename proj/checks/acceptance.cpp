// One line per acceptance criterion: [PASS]/[FAIL], metric, bound, wall time.
#include "suites.hpp"

#include "CLI11.hpp"

#include <algorithm>
#include <cstdio>
#include <functional>
#include <string>
#include <vector>

namespace {

struct Criterion {
    int id;
    const char *title;
    std::function<erx::checks::SuiteResult()> run;
};

const std::vector<Criterion> &criteria() {
    using namespace erx::checks;
    static const std::vector<Criterion> list = {
        {1, "prox operators match numeric argmin oracle", [] { return prox_oracle_suite(); }},
        {2, "epigraph projections match bisection oracle", [] { return epigraph_oracle_suite(); }},
        {3, "closed-form lambda* matches bisection root", [] { return lambda_star_suite(); }},
        {4, "VTV with ERx reaches the direct VTV minimizer", [] { return erx_exactness_experiment(); }},
        {5, "DSTV with W=1 equals DVTV", [] { return dstv_degeneracy_experiment(); }},
        {6, "CS: DSTV and DVTV beat VTV by 0.5 dB", [] { return cs_comparison_experiment(); }},
        {7, "F-RPCA synthetic shifted-signal suite", [] { return rpca_experiment(); }},
        {8, "ASNN invariant to circular shifts", [] { return asnn_shift_suite(); }},
        {9, "nuclear and spectral counterexamples", [] { return counterexample_suite(); }},
        {10, "Moreau identity across prox catalog", [] { return moreau_suite(); }},
    };
    return list;
}

} // namespace

int main(int argc, char **argv) {
    CLI::App app{"Acceptance report"};
    std::vector<int> only;
    app.add_option("-c,--criterion", only, "Run only these criteria (1-10)")->check(CLI::Range(1, 10));
    CLI11_PARSE(app, argc, argv);

    bool all = true;
    for (const Criterion &c : criteria()) {
        if (!only.empty() && std::find(only.begin(), only.end(), c.id) == only.end())
            continue;
        const erx::checks::SuiteResult r = c.run();
        all = all && r.pass;
        std::printf("[%s] %2d %-48s measured=%.3e bound=%.1e time=%.1fs%s\n", r.pass ? "PASS" : "FAIL",
                    c.id, c.title, r.measured, r.tolerance, r.seconds,
                    r.budget_seconds > 0.0 ? (" (limit " + std::to_string(static_cast<int>(r.budget_seconds)) + "s)").c_str()
                                           : "");
        std::printf("        %s\n", r.detail.c_str());
        std::fflush(stdout);
    }
    return all ? 0 : 1;
}
