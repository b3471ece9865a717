// Command-line front end: image recovery, RPCA runs, oracle checks and
// layered-norm evaluation. Every file is written through a temp + rename.

#include "erx/error.hpp"
#include "erx/image.hpp"
#include "erx/layered.hpp"
#include "erx/recovery.hpp"
#include "erx/rpca.hpp"

#include "suites.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <future>
#include <iomanip>
#include <iostream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#ifndef ERX_VERSION
#define ERX_VERSION "unknown"
#endif

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitError = 1;
constexpr int kExitMaxIter = 2;
constexpr int kExitUsage = 64;

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

std::string utc_now() {
    const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&t, &tm);
    std::ostringstream os;
    os << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
    return os.str();
}

/// Collects the outputs of one command and writes the directory's manifest.
class Run {
  public:
    Run(std::string command, std::vector<std::string> args, std::uint64_t seed,
        const std::string &out_prefix)
        : prefix_(out_prefix) {
        if (prefix_.empty())
            throw UsageError("--out-prefix must not be empty");
        dir_ = prefix_.parent_path().empty() ? fs::path(".") : prefix_.parent_path();
        fs::create_directories(dir_);
        manifest_ = {{"command", std::move(command)}, {"args", std::move(args)},
                     {"seed", seed},                  {"version", ERX_VERSION},
                     {"started", utc_now()},          {"outputs", json::array()}};
    }

    fs::path path(const std::string &suffix) const {
        fs::path p = prefix_;
        p += suffix;
        return p;
    }
    void write(const std::string &suffix, const std::string &contents) {
        erx::write_file_atomic(path(suffix), contents);
        manifest_["outputs"].push_back(path(suffix).filename().string());
    }
    void set(const std::string &key, json value) { manifest_["results"][key] = std::move(value); }
    void finish(int exit_code) {
        manifest_["finished"] = utc_now();
        manifest_["exit_code"] = exit_code;
        erx::write_file_atomic(dir_ / "manifest.json", manifest_.dump(2) + "\n");
    }

  private:
    fs::path prefix_;
    fs::path dir_;
    json manifest_;
};

std::string trace_csv(const erx::SolveTrace &t) {
    std::ostringstream os;
    t.write_csv(os);
    return os.str();
}

erx::ImagePlane matrix_image(const erx::DenseMatrix &m) {
    return {m.cols(), m.rows(), 1, erx::DenseVector(m.vec().begin(), m.vec().end())};
}

// ---------------------------------------------------------------------------
// recover

struct RecoverArgs {
    std::string input;
    std::string synthetic;
    std::size_t variant = 0;
    std::size_t size = 32;
    std::string reg = "dstv";
    double w = 0.5;
    std::size_t patch = 3;
    double sampling = 0.2;
    double sigma = 0.1;
    std::uint64_t seed = 7;
    double eps_stop = 1e-7;
    std::size_t max_iter = 50000;
    std::size_t objective_every = 10;
    std::string out_prefix;
};

int cmd_recover(const RecoverArgs &a, const std::vector<std::string> &argv) {
    if (a.input.empty() == a.synthetic.empty())
        throw UsageError("recover needs exactly one of --input or --synthetic");
    const erx::ImagePlane truth =
        a.input.empty() ? erx::synthetic_image(a.variant, a.size, a.size) : erx::load_ppm(a.input);
    if (truth.channels != 3)
        throw erx::InvalidInput("recover: a color (P6) image is required");
    const std::size_t n = truth.pixel_count();
    if ((n & (n - 1)) != 0)
        throw erx::InvalidInput("recover: width x height must be a power of two");

    const erx::CsInstance cs = erx::make_cs_instance(truth, a.sampling, a.sigma, a.seed);
    erx::RecoveryConfig cfg;
    cfg.width = truth.width;
    cfg.height = truth.height;
    cfg.w = a.w;
    cfg.patch = erx::PatchConfig{a.patch};
    cfg.eps_fid = cs.eps_fid;
    cfg.eps_stop = a.eps_stop;
    cfg.max_iter = a.max_iter;
    cfg.seed = a.seed;
    cfg.objective_every = a.objective_every;

    Run run("recover", argv, a.seed, a.out_prefix);
    int code = kExitOk;
    if (a.reg == "vtv-pair") {
        cfg.regularizer = erx::Regularizer::VTV;
        const erx::EquivalenceCurves ec = erx::vtv_pair_equivalence(cs.y, cs.phi, cfg);
        std::ostringstream os;
        os << "iter,with_erx,without_erx\n" << std::setprecision(10);
        const std::size_t rows = std::max(ec.with_erx.size(), ec.without_erx.size());
        for (std::size_t i = 0; i < rows; ++i) {
            os << i + 1 << ',';
            if (i < ec.with_erx.size())
                os << ec.with_erx[i];
            os << ',';
            if (i < ec.without_erx.size())
                os << ec.without_erx[i];
            os << '\n';
        }
        run.write("_curves.csv", os.str());
        const erx::ImagePlane img(truth.width, truth.height, 3, ec.erx_final);
        run.write(".ppm", erx::encode_pnm(img));
        const double p = erx::psnr(img, truth);
        std::printf("psnr %.4f dB (vtv with ERx, %zu iterations; direct %zu)\n", p,
                    ec.with_erx.size(), ec.without_erx.size());
        run.set("psnr_db", p);
        if (ec.erx_status != erx::SolveStatus::Converged ||
            ec.direct_status != erx::SolveStatus::Converged)
            code = kExitMaxIter;
    } else {
        cfg.regularizer = erx::regularizer_from_string(a.reg);
        const erx::RecoveryResult r = erx::recover(cs.y, cs.phi, cfg);
        run.write(".ppm", erx::encode_pnm(r.image));
        run.write("_trace.csv", trace_csv(r.trace));
        const double p = erx::psnr(r.image, truth);
        std::printf("psnr %.4f dB (%s, %zu iterations)\n", p, a.reg.c_str(), r.trace.iter);
        run.set("psnr_db", p);
        run.set("iterations", r.trace.iter);
        if (r.status != erx::SolveStatus::Converged)
            code = kExitMaxIter;
    }
    run.finish(code);
    return code;
}

// ---------------------------------------------------------------------------
// rpca

struct RpcaArgs {
    std::string mode = "freq";
    std::size_t shift = 0;
    double p = 0.025;
    std::uint64_t seed = 1;
    bool sweep = false;
    std::size_t rows = 43;
    std::size_t cols = 20;
    double eps_stop = 1e-5;
    std::size_t jobs = 0;
    std::size_t objective_every = 10;
    std::string out_prefix;
};

int cmd_rpca(const RpcaArgs &a, const std::vector<std::string> &argv) {
    Run run("rpca", argv, a.seed, a.out_prefix);
    if (a.sweep) {
        static constexpr double ps[3] = {0.025, 0.05, 0.1};
        const std::size_t jobs = a.jobs ? a.jobs : std::max(1u, std::thread::hardware_concurrency());
        std::vector<erx::SweepRow> rows(9);
        for (std::size_t first = 0; first < 9; first += jobs) {
            std::vector<std::future<erx::SweepRow>> pending;
            for (std::size_t c = first; c < std::min<std::size_t>(9, first + jobs); ++c) {
                const std::size_t shift = c / 3, k = c % 3;
                pending.push_back(std::async(std::launch::async, [&, shift, k] {
                    return erx::run_rpca_cell(shift, ps[k], erx::sweep_seed(a.seed, shift, k),
                                              a.rows, a.cols, a.eps_stop);
                }));
            }
            for (std::size_t i = 0; i < pending.size(); ++i)
                rows[first + i] = pending[i].get();
        }
        std::ostringstream os;
        erx::write_sweep_csv(os, rows);
        run.write("_sweep.csv", os.str());
        std::cout << os.str();
        run.finish(kExitOk);
        return kExitOk;
    }

    const erx::DenseMatrix target = erx::gen_shifted_target(a.shift, a.rows, a.cols);
    const erx::DenseMatrix noise = erx::gen_sparse_noise(target, a.p, a.seed);
    erx::DenseMatrix x = target;
    for (std::size_t i = 0; i < x.size(); ++i)
        x.vec()[i] += noise.vec()[i];
    erx::RpcaConfig cfg;
    cfg.mode = a.mode == "signal" ? erx::RpcaMode::SignalDomain : erx::RpcaMode::FrequencyDomain;
    cfg.l1_eps = erx::norm1(noise.vec());
    cfg.eps_stop = a.eps_stop;
    cfg.seed = a.seed;
    cfg.objective_every = a.objective_every;
    const erx::RpcaResult r = erx::frpca_solve(x, cfg);
    const double p = erx::psnr(r.low_rank.vec(), target.vec());

    run.write("_L.pgm", erx::encode_pnm(matrix_image(r.low_rank)));
    run.write("_S.pgm", erx::encode_pnm(matrix_image(r.sparse)));
    run.write("_trace.csv", trace_csv(r.trace));
    std::ostringstream os;
    os << "shift,p,seed,mode,psnr\n"
       << std::setprecision(10) << a.shift << ',' << a.p << ',' << a.seed << ',' << a.mode << ','
       << p << '\n';
    run.write(".csv", os.str());
    std::printf("psnr %.4f dB (%s, %zu iterations)\n", p, a.mode.c_str(), r.trace.iter);
    run.set("psnr_db", p);
    const int code = r.status == erx::SolveStatus::Converged ? kExitOk : kExitMaxIter;
    run.finish(code);
    return code;
}

// ---------------------------------------------------------------------------
// check

int cmd_check(std::vector<std::string> suites) {
    if (suites.empty())
        suites = erx::checks::check_suite_names();
    bool all = true;
    for (const std::string &s : suites) {
        const erx::checks::SuiteResult r = erx::checks::run_check_suite(s);
        std::printf("[%s] %-14s measured=%.3e bound=%.1e time=%.1fs\n", r.pass ? "PASS" : "FAIL",
                    r.name.c_str(), r.measured, r.tolerance, r.seconds);
        if (!r.detail.empty())
            std::printf("       %s\n", r.detail.c_str());
        all = all && r.pass;
    }
    return all ? kExitOk : kExitError;
}

// ---------------------------------------------------------------------------
// norm

int cmd_norm(const std::string &tree, const std::vector<double> &values) {
    const erx::LayeredNorm ln = erx::parse_layered(tree, values.size());
    const erx::Classification c = erx::validate_assumptions(ln);
    if (c.cls == erx::ErxClass::Invalid)
        throw erx::StructureError("norm: " + c.diagnostic);
    std::printf("%.17g\n", erx::eval_layered(ln, values));
    std::printf("%s: %s\n",
                c.cls == erx::ErxClass::SolutionPreserving ? "solution-preserving" : "relaxation-only",
                c.diagnostic.c_str());
    return kExitOk;
}

} // namespace

int main(int argc, char **argv) {
    CLI::App app{"Epigraphical relaxation toolkit"};
    app.set_version_flag("--version", ERX_VERSION);
    app.require_subcommand(1);
    const std::vector<std::string> args(argv + 1, argv + argc);

    RecoverArgs ra;
    auto *rec = app.add_subcommand("recover", "Compressed-sensing color image recovery");
    auto *in_opt = rec->add_option("--input", ra.input, "Ground-truth PPM (P6)")->check(CLI::ExistingFile);
    rec->add_option("--synthetic", ra.synthetic, "Built-in test image")
        ->check(CLI::IsMember({"piecewise"}))
        ->excludes(in_opt);
    rec->add_option("--variant", ra.variant, "Synthetic image variant")->check(CLI::Range(0, 2));
    rec->add_option("--size", ra.size, "Synthetic image side (power of two)")->check(CLI::Range(2, 1024));
    rec->add_option("--reg", ra.reg, "Regularizer")
        ->check(CLI::IsMember({"vtv", "vtv-direct", "dvtv", "dstv", "vtv-pair"}));
    rec->add_option("--w", ra.w, "Luma weight")->check(CLI::NonNegativeNumber);
    rec->add_option("--patch", ra.patch, "DSTV patch side (odd)");
    rec->add_option("--sampling", ra.sampling, "Measurements per unknown")->check(CLI::Range(1e-6, 1.0));
    rec->add_option("--sigma", ra.sigma, "Noise standard deviation")->check(CLI::NonNegativeNumber);
    rec->add_option("--seed", ra.seed, "Measurement and noise seed");
    rec->add_option("--eps-stop", ra.eps_stop, "Stop when ||p_n+1 - p_n|| falls below this")
        ->check(CLI::PositiveNumber);
    rec->add_option("--max-iter", ra.max_iter, "Iteration cap");
    rec->add_option("--objective-every", ra.objective_every, "Log the objective every k iterations (0: never)");
    rec->add_option("--out-prefix", ra.out_prefix, "Output path prefix")->required();

    RpcaArgs pa;
    auto *rp = app.add_subcommand("rpca", "Shifted-signal robust PCA");
    rp->add_option("--mode", pa.mode, "signal or freq")->check(CLI::IsMember({"signal", "freq"}));
    rp->add_option("--shift", pa.shift, "Per-column shift of the target");
    rp->add_option("--p", pa.p, "Sparse noise probability")->check(CLI::Range(0.0, 1.0));
    rp->add_option("--seed", pa.seed, "Noise seed (base seed with --sweep)");
    rp->add_flag("--sweep", pa.sweep, "Run the 3 x 3 shift x p grid with both modes");
    rp->add_option("--rows", pa.rows, "Samples per column")->check(CLI::PositiveNumber);
    rp->add_option("--cols", pa.cols, "Columns")->check(CLI::PositiveNumber);
    rp->add_option("--eps-stop", pa.eps_stop, "Stopping tolerance")->check(CLI::PositiveNumber);
    rp->add_option("--objective-every", pa.objective_every, "Log the objective every k iterations (0: never)");
    rp->add_option("--jobs", pa.jobs, "Parallel sweep cells (0: hardware threads)");
    rp->add_option("--out-prefix", pa.out_prefix, "Output path prefix")->required();

    std::vector<std::string> suites;
    auto *ck = app.add_subcommand("check", "Oracle and property suites");
    ck->add_option("--suite", suites, "Suite to run (repeatable)")
        ->check(CLI::IsMember(erx::checks::check_suite_names()));

    std::string tree;
    std::vector<double> values;
    auto *nm = app.add_subcommand("norm", "Evaluate and classify a layered norm");
    nm->add_option("--tree", tree, "Norm tree, e.g. l1(group6:l2)")->required();
    nm->add_option("values", values, "Input vector")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp &e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion &e) {
        return app.exit(e);
    } catch (const CLI::ParseError &e) {
        app.exit(e);
        return kExitUsage;
    }

    try {
        if (*rec)
            return cmd_recover(ra, args);
        if (*rp)
            return cmd_rpca(pa, args);
        if (*ck)
            return cmd_check(suites);
        return cmd_norm(tree, values);
    } catch (const UsageError &e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::exception &e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitError;
    }
}
