// cstk: experiment driver for the sparse recovery toolkit.
//
// Exit codes: 0 success, 2 bad configuration, 3 numerical failure.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "cstk/bench.hpp"
#include "cstk/convex.hpp"
#include "cstk/ensembles.hpp"
#include "cstk/error.hpp"
#include "cstk/greedy.hpp"
#include "cstk/rip.hpp"
#include "cstk/rng.hpp"
#include "json.hpp"

namespace {

using namespace cstk;

constexpr int kExitConfig = 2;
constexpr int kExitNumerical = 3;

struct Common {
    std::string algo = "omp";
    std::size_t d = 256;
    std::vector<std::string> m;
    std::vector<std::string> s;
    std::size_t trials = 100;
    std::uint64_t seed = 0;
    std::string ensemble = "gaussian";
    std::string signal = "flat";
    double p = 0.5;
    std::optional<double> noise_norm;
    std::optional<double> noise_fraction;
    double threshold = 1e-5;
    std::string out;
    std::string format = "csv";
    unsigned threads = 1;
    bool timing = false;
};

struct ConfigError : Error {
    using Error::Error;
};

// Config files split unquoted "a,b" into several values; put them back together.
std::string joined(const std::vector<std::string>& parts, const std::string& fallback) {
    if (parts.empty()) return fallback;
    std::string out;
    for (const auto& p : parts) out += (out.empty() ? "" : ",") + p;
    return out;
}

std::vector<double> parse_real_list(const std::string& text) {
    std::vector<double> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        std::size_t used = 0;
        double v = 0.0;
        try {
            v = std::stod(item, &used);
        } catch (const std::exception&) {
            used = 0;
        }
        if (used == 0 || used != item.size()) throw ConfigError("expected a real number, got '" + item + "'");
        out.push_back(v);
    }
    if (out.empty()) throw ConfigError("empty list of reals");
    return out;
}

SignalKind parse_signal(const std::string& name) {
    if (name == "flat") return SignalKind::flat;
    if (name == "compressible") return SignalKind::compressible;
    throw ConfigError("unknown signal kind '" + name + "' (flat, compressible)");
}

ExperimentGrid make_grid(const Common& c) {
    if (c.m.empty() || c.s.empty()) throw ConfigError("--m and --s are required");
    ExperimentGrid g;
    g.algo = parse_algorithm(c.algo);
    g.d = c.d;
    g.m_values = parse_count_list(joined(c.m, ""));
    g.s_values = parse_count_list(joined(c.s, ""));
    g.trials = c.trials;
    g.seed = c.seed;
    g.ensemble = parse_family(c.ensemble);
    g.signal = parse_signal(c.signal);
    g.p = c.p;
    g.noise_norm = c.noise_norm;
    g.noise_fraction = c.noise_fraction;
    g.threshold = c.threshold;
    g.threads = c.threads;
    for (const auto& w : g.validate()) std::cerr << "warning: " << w << '\n';
    return g;
}

// Opens --out (or stdout) and hands the stream to `emit`.
template <class F>
void with_output(const Common& c, F&& emit) {
    if (c.out.empty()) {
        emit(std::cout);
        std::cout.flush();
        return;
    }
    std::ofstream os(c.out, std::ios::binary);
    if (!os) throw ConfigError("cannot open output file " + c.out);
    emit(os);
    if (!os) throw ConfigError("failed writing " + c.out);
}

DenseMatrix load_matrix(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw ConfigError("cannot open matrix file " + path);
    return read_matrix_csv(is).matrix;
}

Vector load_signal(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw ConfigError("cannot open signal file " + path);
    const DenseMatrix v = read_matrix_csv(is).matrix;
    return Vector(v.data().begin(), v.data().end());
}

nlohmann::ordered_json recover_report(Algorithm algo, const DenseMatrix& phi, const Vector& u, std::size_t s,
                                      double eps) {
    RecoveryReport rep;
    switch (algo) {
        case Algorithm::bp:
            rep.estimate = eps > 0.0 ? bp_denoise(phi, u, eps) : bp_equality(phi, u);
            rep.support = rep.estimate.support();
            rep.iterations = 1;
            break;
        case Algorithm::omp:
            rep = omp(phi, u, s);
            break;
        case Algorithm::stomp:
            rep = stomp(phi, u);
            break;
        case Algorithm::romp: {
            RompConfig cfg;
            cfg.s = s;
            rep = romp(phi, u, cfg);
            break;
        }
        case Algorithm::cosamp: {
            CosampConfig cfg;
            cfg.s = s;
            if (eps > 0.0) cfg.epsilon = eps;
            rep = cosamp(phi, u, cfg);
            break;
        }
        case Algorithm::rwl1: {
            RwConfig cfg;
            cfg.epsilon = eps;
            rep = reweighted_l1(phi, u, cfg);
            break;
        }
    }
    nlohmann::ordered_json j;
    j["algo"] = algorithm_name(algo);
    j["m"] = phi.rows();
    j["d"] = phi.cols();
    j["s"] = s;
    j["iterations"] = rep.iterations;
    j["halt_reason"] = halt_reason_name(rep.halt_reason);
    j["residual_norm"] = norm2(subtract(matvec(phi, rep.estimate.dense()), u));
    j["residual_history"] = rep.residual_history;
    j["support"] = std::vector<std::size_t>(rep.support.begin(), rep.support.end());
    j["estimate"] = rep.estimate.dense();
    j["warnings"] = rep.warnings;
    return j;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Sparse recovery experiments"};
    app.set_config("--config", "", "key = value file; command-line flags take precedence");
    app.require_subcommand(1);
    app.fallthrough();

    Common c;
    app.add_option("--algo", c.algo, "bp, omp, stomp, romp, cosamp or rwl1")->capture_default_str();
    app.add_option("--d", c.d, "ambient dimension")->capture_default_str();
    app.add_option("--m", c.m, "measurement counts: list a,b,c or range start:stop[:step]");
    app.add_option("--s", c.s, "sparsity levels: list or range");
    app.add_option("--trials", c.trials, "trials per cell")->capture_default_str();
    app.add_option("--seed", c.seed, "master seed")->capture_default_str();
    app.add_option("--ensemble", c.ensemble, "gaussian, bernoulli or partial_dct")->capture_default_str();
    app.add_option("--signal", c.signal, "flat or compressible")->capture_default_str();
    app.add_option("--p", c.p, "decay exponent of compressible signals")->capture_default_str();
    app.add_option("--noise-norm", c.noise_norm, "absolute noise norm");
    app.add_option("--noise-fraction", c.noise_fraction, "noise norm relative to ||Phi x||");
    app.add_option("--threshold", c.threshold, "success threshold on ||x_hat - x||")->capture_default_str();
    app.add_option("--out", c.out, "output file (default stdout)");
    app.add_option("--format", c.format, "csv or jsonl")->capture_default_str();
    app.add_option("--threads", c.threads, "worker threads")->capture_default_str();
    app.add_flag("--timing", c.timing, "add a mean_runtime column (not reproducible)");

    auto* phase = app.add_subcommand("phase", "success counts over an (m, s) grid");
    auto* trend = app.add_subcommand("trend", "largest s reaching the success level, per m");
    double level = 0.99;
    trend->add_option("--level", level, "required success rate")->capture_default_str();
    auto* noise = app.add_subcommand("noise", "mean error-to-noise ratios");
    std::string perturb = "measurement";
    noise->add_option("--perturb", perturb, "measurement or signal")->capture_default_str();
    auto* iters = app.add_subcommand("iters", "mean iteration counts and cap violations");

    auto* kacz = app.add_subcommand("kaczmarz", "randomized Kaczmarz error vs the sqrt(R) gamma threshold; --m defaults to 2n (n with --identity)");
    KaczmarzStudy ks;
    kacz->add_option("--n", ks.n, "columns")->capture_default_str();
    kacz->add_option("--iters", ks.iters, "projections per trial")->capture_default_str();
    kacz->add_option("--log-stride", ks.log_stride, "log the error curve every k iterations (0: final only)");
    kacz->add_flag("--identity", ks.identity, "A = I, x = 0, noise = ones");

    auto* rwb = app.add_subcommand("rwbounds", "iterations of the reweighted error recursion");
    double mu = 10.0, tol = 1e-3;
    std::vector<std::string> eps_list{"0.01", "0.1", "1"};
    std::vector<std::string> delta_list{"0.05", "0.1", "0.15", "0.2", "0.25", "0.3", "0.35", "0.4"};
    std::string alpha_form = "sparse";
    rwb->add_option("--mu", mu)->capture_default_str();
    rwb->add_option("--eps", eps_list, "comma-separated noise levels")->delimiter(',')->capture_default_str();
    rwb->add_option("--delta", delta_list, "comma-separated RIC values")->delimiter(',')->capture_default_str();
    rwb->add_option("--tol", tol, "distance to the limit that counts as converged")->capture_default_str();
    rwb->add_option("--alpha-form", alpha_form, "sparse or l1")->capture_default_str();

    auto* ric = app.add_subcommand("ric", "restricted isometry constant of a matrix (JSON)");
    std::string matrix_path, ric_mode = "exact";
    std::size_t r = 2;
    ric->add_option("--matrix", matrix_path, "matrix CSV; otherwise generated from --ensemble/--m/--d/--seed");
    ric->add_option("--r", r, "support size")->capture_default_str();
    ric->add_option("--mode", ric_mode, "exact or mc")->capture_default_str();

    auto* rec = app.add_subcommand("recover", "run one algorithm on a matrix/signal pair (JSON report)");
    std::string signal_path;
    rec->add_option("--matrix", matrix_path, "matrix CSV")->required();
    rec->add_option("--signal", signal_path, "signal CSV")->required();

    auto* gen = app.add_subcommand("gen", "write a generated matrix or signal as CSV");
    std::string gen_kind = "matrix";
    gen->add_option("--kind", gen_kind, "matrix or signal")->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitConfig;
    }

    try {
        const OutputFormat fmt = parse_format(c.format);
        if (c.threads == 0) throw ConfigError("--threads must be at least 1");
        if (*phase || *trend || *noise || *iters) {
            const ExperimentGrid g = make_grid(c);
            if (*trend) {
                const auto t = run_trend(g, level);
                with_output(c, [&](std::ostream& os) { write_table(os, trend_table(g, t, level), fmt); });
            } else {
                std::vector<CellResult> cells;
                if (*phase) cells = run_phase_transition(g);
                if (*iters) cells = run_iteration_study(g);
                if (*noise) {
                    if (perturb != "measurement" && perturb != "signal")
                        throw ConfigError("--perturb must be measurement or signal");
                    cells = run_noise_study(g, perturb == "signal" ? NoiseStudyMode::signal : NoiseStudyMode::measurement);
                }
                with_output(c, [&](std::ostream& os) { write_table(os, cells_table(cells, c.timing), fmt); });
            }
        } else if (*kacz) {
            const auto ms = parse_count_list(joined(c.m, std::to_string(ks.identity ? ks.n : 2 * ks.n)));
            if (ms.size() != 1) throw ConfigError("kaczmarz takes a single --m");
            ks.m = ms[0];
            ks.trials = c.trials;
            ks.seed = c.seed;
            ks.noise_fraction = c.noise_fraction.value_or(0.0);
            ks.threads = c.threads;
            const auto rows = run_kaczmarz_study(ks);
            with_output(c, [&](std::ostream& os) { write_table(os, kaczmarz_table(ks, rows), fmt); });
        } else if (*rwb) {
            if (alpha_form != "sparse" && alpha_form != "l1") throw ConfigError("--alpha-form must be sparse or l1");
            const auto rows = run_rw_bounds(mu, parse_real_list(joined(eps_list, "")), parse_real_list(joined(delta_list, "")), tol,
                                            alpha_form == "l1" ? AlphaForm::l1_theorem : AlphaForm::sparse_case);
            with_output(c, [&](std::ostream& os) { write_table(os, rw_table(rows), fmt); });
        } else if (*ric) {
            DenseMatrix phi;
            if (!matrix_path.empty()) {
                phi = load_matrix(matrix_path);
            } else {
                const auto ms = parse_count_list(joined(c.m, "0"));
                if (ms.size() != 1) throw ConfigError("ric takes a single --m");
                phi = gen_matrix({parse_family(c.ensemble), ms[0], c.d, c.seed});
            }
            RicReport rep;
            if (ric_mode == "exact") {
                RicOptions opts;
                opts.threads = c.threads;
                rep = ric_exact(phi, r, opts);
            } else if (ric_mode == "mc") {
                rep = ric_monte_carlo(phi, r, c.trials, c.seed);
            } else {
                throw ConfigError("--mode must be exact or mc");
            }
            nlohmann::ordered_json j;
            j["r"] = rep.r;
            j["delta"] = rep.delta;
            j["mode"] = rep.mode == RicMode::exact ? "exact" : "monte_carlo";
            j["witness"] = std::vector<std::size_t>(rep.witness.begin(), rep.witness.end());
            with_output(c, [&](std::ostream& os) { os << j.dump() << '\n'; });
        } else if (*rec) {
            const DenseMatrix phi = load_matrix(matrix_path);
            const Vector x = load_signal(signal_path);
            if (x.size() != phi.cols()) throw ConfigError("signal length does not match the matrix");
            const auto ss = parse_count_list(joined(c.s, "1"));
            if (ss.size() != 1) throw ConfigError("recover takes a single --s");
            Vector u = matvec(phi, x);
            Vector e(u.size(), 0.0);
            if (c.noise_norm && *c.noise_norm > 0.0) e = gen_noise({u.size(), *c.noise_norm, derive_seed(c.seed, {kTagNoise})});
            if (c.noise_fraction && *c.noise_fraction > 0.0) e = relative_noise(u, *c.noise_fraction, derive_seed(c.seed, {kTagNoise}));
            u = add(u, e);
            auto j = recover_report(parse_algorithm(c.algo), phi, u, ss[0], norm2(e));
            j["noise_norm"] = norm2(e);
            j["error"] = norm2(subtract(j["estimate"].get<Vector>(), x));
            with_output(c, [&](std::ostream& os) { os << j.dump() << '\n'; });
        } else if (*gen) {
            const auto ms = parse_count_list(joined(c.m, "0"));
            const auto ss = parse_count_list(joined(c.s, "1"));
            if (ms.size() != 1 || ss.size() != 1) throw ConfigError("gen takes a single --m and --s");
            if (gen_kind == "matrix") {
                const Family f = parse_family(c.ensemble);
                const DenseMatrix a = gen_matrix({f, ms[0], c.d, c.seed});
                with_output(c, [&](std::ostream& os) { write_matrix_csv(os, a, family_name(f), c.seed); });
            } else if (gen_kind == "signal") {
                const SparseVector x = gen_signal({c.d, ss[0], parse_signal(c.signal), c.p, c.seed, false});
                with_output(c, [&](std::ostream& os) { write_signal_csv(os, x, c.seed); });
            } else {
                throw ConfigError("--kind must be matrix or signal");
            }
        }
    } catch (const NumericalError& e) {
        std::cerr << "numerical failure: " << e.what() << '\n';
        return kExitNumerical;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitConfig;
    }
    return 0;
}
