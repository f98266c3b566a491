// ssgp: sample self-similar Gaussian processes, emit covariance tables, and
// run the library's verification suites from the command line.

#include <cstdint>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "ssgp/checks.hpp"
#include "ssgp/ssgp.hpp"

namespace {

using namespace ssgp;

constexpr int kExitOk = 0;
constexpr int kExitCheckFailed = 1;
constexpr int kExitBadConfig = 2;
constexpr int kExitNumericFailure = 3;

// --- key=value config files (flags win) -------------------------------------

std::string trim(const std::string& s) {
    const auto begin = s.find_first_not_of(" \t\r");
    if (begin == std::string::npos) return "";
    const auto end = s.find_last_not_of(" \t\r");
    return s.substr(begin, end - begin + 1);
}

std::map<std::string, std::string> read_config_file(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw std::invalid_argument("cannot open config file " + path);
    std::map<std::string, std::string> kv;
    std::string line;
    while (std::getline(is, line)) {
        const std::string stripped = trim(line);
        if (stripped.empty() || stripped.front() == '#') continue;
        const auto eq = stripped.find('=');
        if (eq == std::string::npos)
            throw std::invalid_argument("config line is not key=value: " + stripped);
        kv[trim(stripped.substr(0, eq))] = trim(stripped.substr(eq + 1));
    }
    return kv;
}

// Binds config keys to CLI options; a key applies only when the option was
// not given on the command line.
class ConfigBindings {
public:
    void bind_string(CLI::Option* opt, const std::string& key, std::string& target) {
        items_.push_back({opt, key, [&target](const std::string& v) { target = v; }});
    }
    void bind_double(CLI::Option* opt, const std::string& key, double& target) {
        items_.push_back({opt, key, [&target, key](const std::string& v) {
                              try {
                                  target = std::stod(v);
                              } catch (const std::exception&) {
                                  throw std::invalid_argument("config value for '" + key +
                                                              "' is not a number: " + v);
                              }
                          }});
    }
    void bind_size(CLI::Option* opt, const std::string& key, std::size_t& target) {
        items_.push_back({opt, key, [&target, key](const std::string& v) {
                              try {
                                  target = static_cast<std::size_t>(std::stoull(v));
                              } catch (const std::exception&) {
                                  throw std::invalid_argument("config value for '" + key +
                                                              "' is not an integer: " + v);
                              }
                          }});
    }
    void bind_uint64(CLI::Option* opt, const std::string& key, std::uint64_t& target) {
        items_.push_back({opt, key, [&target, key](const std::string& v) {
                              try {
                                  target = std::stoull(v);
                              } catch (const std::exception&) {
                                  throw std::invalid_argument("config value for '" + key +
                                                              "' is not an integer: " + v);
                              }
                          }});
    }
    void bind_flag(CLI::Option* opt, const std::string& key, bool& target) {
        items_.push_back({opt, key, [&target, key](const std::string& v) {
                              if (v == "1" || v == "true") target = true;
                              else if (v == "0" || v == "false") target = false;
                              else
                                  throw std::invalid_argument("config value for '" + key +
                                                              "' is not a boolean: " + v);
                          }});
    }

    void apply_file(const std::string& path) const {
        const std::map<std::string, std::string> kv = read_config_file(path);
        for (const auto& [key, value] : kv) {
            bool known = false;
            for (const auto& item : items_) {
                if (item.key != key) continue;
                known = true;
                if (item.option->count() == 0) item.apply(value);
                break;
            }
            if (!known) throw std::invalid_argument("unknown config key: " + key);
        }
    }

private:
    struct Item {
        CLI::Option* option;
        std::string key;
        std::function<void(const std::string&)> apply;
    };
    std::vector<Item> items_;
};

// --- process and grid configuration ------------------------------------------

struct GridSpec {
    double horizon = 1.0;
    std::size_t cells = 64;
};

GridSpec parse_grid(const std::string& text) {
    const auto colon = text.find(':');
    if (colon == std::string::npos)
        throw std::invalid_argument("grid must be '<horizon>:<cells>', e.g. 1.0:64");
    GridSpec spec;
    try {
        spec.horizon = std::stod(text.substr(0, colon));
        spec.cells = static_cast<std::size_t>(std::stoul(text.substr(colon + 1)));
    } catch (const std::exception&) {
        throw std::invalid_argument("grid must be '<horizon>:<cells>', e.g. 1.0:64");
    }
    if (!(spec.horizon > 0.0) || spec.cells < 1)
        throw std::invalid_argument("grid needs horizon > 0 and at least one cell");
    return spec;
}

struct ProcessConfig {
    std::string kind = "fbm";  // fbm | brownian | power
    double hurst = 0.75;
    double exponent = 1.0;  // power process: F(u) = u^exponent
    double beta = 0.5;      // power process self-similarity index
};

SelfSimilarKernel make_self_similar_kernel(const ProcessConfig& p) {
    if (p.kind == "fbm") return fbm_self_similar_kernel(HurstIndex(p.hurst));
    if (p.kind == "brownian") {
        FFunction one;
        one.eval = [](double) { return 1.0; };
        one.name = "brownian";
        return SelfSimilarKernel{0.5, one};
    }
    if (p.kind == "power") {
        if (!(p.beta > 0.0)) throw std::invalid_argument("power process needs --beta > 0");
        if (!(p.exponent > -0.5)) throw std::invalid_argument("power process needs --exponent > -1/2");
        FFunction f;
        const double e = p.exponent;
        f.eval = [e](double u) { return std::pow(u, e); };
        if (e < 0.0) f.singularity_at_zero = e;
        f.name = "power_u^" + std::to_string(e);
        return SelfSimilarKernel{p.beta, f};
    }
    throw std::invalid_argument("unknown process '" + p.kind + "' (fbm | brownian | power)");
}

GenericVolterraKernel make_kernel(const ProcessConfig& p, double kernel_rtol) {
    if (p.kind == "fbm") return fbm_volterra_kernel(HurstIndex(p.hurst), kernel_rtol);
    return as_generic(make_self_similar_kernel(p));
}

// Analytic covariance when one exists (fbm, brownian); nullopt for custom shapes.
std::optional<std::function<double(double, double)>> analytic_covariance(const ProcessConfig& p) {
    if (p.kind == "fbm") {
        const HurstIndex h(p.hurst);
        return [h](double t, double s) { return fbm_covariance(h, t, s); };
    }
    if (p.kind == "brownian")
        return [](double t, double s) { return std::min(t, s); };
    return std::nullopt;
}

std::string process_label(const ProcessConfig& p) {
    if (p.kind == "fbm") return "fbm H=" + std::to_string(p.hurst);
    if (p.kind == "brownian") return "brownian";
    return "power F=u^" + std::to_string(p.exponent) + " beta=" + std::to_string(p.beta);
}

void append_common_meta(std::vector<std::pair<std::string, std::string>>& meta,
                        const ProcessConfig& p, const std::string& grid, bool timestamp) {
    meta.emplace_back("process", p.kind);
    if (p.kind == "fbm") meta.emplace_back("hurst", detail::format_double(p.hurst));
    if (p.kind == "power") {
        meta.emplace_back("exponent", detail::format_double(p.exponent));
        meta.emplace_back("beta", detail::format_double(p.beta));
    }
    meta.emplace_back("grid", grid);
    if (timestamp) {
        const std::time_t now = std::time(nullptr);
        char buf[64];
        std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
        meta.emplace_back("timestamp", buf);
    }
}

// --- subcommand bodies ----------------------------------------------------------

int run_sample(const ProcessConfig& proc, const std::string& grid_text, std::size_t n_paths,
               std::uint64_t seed, const std::string& method, const std::string& output,
               double kernel_rtol, bool timestamp) {
    const GridSpec gs = parse_grid(grid_text);
    const TimeGrid grid = TimeGrid::uniform(gs.horizon, gs.cells);
    if (n_paths == 0) throw std::invalid_argument("--paths must be >= 1");

    PathEnsemble ensemble = [&]() {
        if (method == "volterra") {
            return sample_volterra(make_kernel(proc, kernel_rtol), grid, n_paths, SeedSpec{seed});
        }
        if (method == "cholesky") {
            CovarianceMatrix c = [&]() {
                if (auto r = analytic_covariance(proc)) return covariance_matrix(*r, grid);
                const GenericVolterraKernel k = make_kernel(proc, kernel_rtol);
                return covariance_matrix(
                    [&k](double t, double s) { return factorized_covariance(k, t, s); }, grid);
            }();
            return sample_cholesky(c, n_paths, SeedSpec{seed}, process_label(proc));
        }
        throw std::invalid_argument("unknown method '" + method + "' (volterra | cholesky)");
    }();
    ensemble.process = process_label(proc);
    write_ensemble_csv(ensemble, output);

    std::vector<std::pair<std::string, std::string>> meta;
    meta.emplace_back("command", "sample");
    meta.emplace_back("master_seed", std::to_string(seed));
    meta.emplace_back("n_paths", std::to_string(n_paths));
    meta.emplace_back("method", method);
    meta.emplace_back("kernel_rtol", detail::format_double(kernel_rtol));
    meta.emplace_back("output", output);
    append_common_meta(meta, proc, grid_text, timestamp);
    write_sidecar(output + ".meta", meta);
    std::cout << "wrote " << output << " (" << n_paths << " paths, " << grid.size()
              << " grid points)\n";
    return kExitOk;
}

int run_covariance(const ProcessConfig& proc, const std::string& grid_text,
                   const std::string& kind, bool compare, bool rank1, double rank1_beta,
                   const std::string& output, double cov_rtol, bool timestamp) {
    const GridSpec gs = parse_grid(grid_text);
    const TimeGrid grid = TimeGrid::uniform(gs.horizon, gs.cells);

    std::vector<std::pair<std::string, std::string>> meta;
    meta.emplace_back("command", "covariance");

    if (rank1) {
        const Rank1Report report = rank1_demo(rank1_beta, grid);
        std::cout << "rank-1 demo: r(t,s) = (ts)^" << rank1_beta << " on " << grid_text << "\n";
        std::cout << "numerical rank = " << report.rank << "\n";
        for (const auto& [degree, hom] : report.degree_scan)
            std::cout << "homogeneity degree " << degree << ": "
                      << (hom.homogeneous ? "holds" : "fails")
                      << " (worst violation " << hom.worst_violation << ")\n";
        if (!output.empty()) {
            const CovarianceMatrix c = covariance_matrix(
                [rank1_beta](double t, double s) {
                    return std::pow(t, rank1_beta) * std::pow(s, rank1_beta);
                },
                grid);
            write_covariance_csv(c, output);
            meta.emplace_back("rank1_beta", detail::format_double(rank1_beta));
            meta.emplace_back("output", output);
            append_common_meta(meta, proc, grid_text, timestamp);
            write_sidecar(output + ".meta", meta);
        }
        return kExitOk;
    }

    if (output.empty()) throw std::invalid_argument("covariance: --output is required");
    const auto analytic = analytic_covariance(proc);
    const GenericVolterraKernel kernel = make_kernel(proc, 1e-10);
    auto factorized = [&](double t, double s) {
        return factorized_covariance(kernel, t, s, cov_rtol);
    };

    if (kind == "analytic") {
        if (!analytic)
            throw std::invalid_argument("no analytic covariance for process '" + proc.kind + "'");
        write_covariance_csv(covariance_matrix(*analytic, grid), output);
    } else if (kind == "factorized") {
        write_covariance_csv(covariance_matrix(factorized, grid), output);
    } else if (kind == "both") {
        if (!analytic)
            throw std::invalid_argument("no analytic covariance for process '" + proc.kind + "'");
        std::ofstream os(output);
        if (!os) throw data_error("covariance: cannot open " + output);
        os << "t,s,analytic,factorized,abs_error,rel_error\n";
        double max_rel = 0.0;
        const std::vector<double> ts = grid.positive_points();
        for (std::size_t i = 0; i < ts.size(); ++i) {
            for (std::size_t j = 0; j <= i; ++j) {
                const double a = (*analytic)(ts[i], ts[j]);
                const double f = factorized(ts[i], ts[j]);
                const double abs_err = std::abs(f - a);
                const double rel_err = abs_err / std::max(std::abs(a), 1e-300);
                max_rel = std::max(max_rel, rel_err);
                os << detail::format_double(ts[i]) << "," << detail::format_double(ts[j]) << ","
                   << detail::format_double(a) << "," << detail::format_double(f) << ","
                   << detail::format_double(abs_err) << "," << detail::format_double(rel_err)
                   << "\n";
            }
        }
        if (compare) std::cout << "max_rel_error=" << max_rel << "\n";
    } else {
        throw std::invalid_argument("unknown kind '" + kind + "' (analytic | factorized | both)");
    }

    meta.emplace_back("kind", kind);
    meta.emplace_back("cov_rtol", detail::format_double(cov_rtol));
    meta.emplace_back("output", output);
    append_common_meta(meta, proc, grid_text, timestamp);
    write_sidecar(output + ".meta", meta);
    return kExitOk;
}

int run_verify(const std::string& suite, std::size_t n_paths, std::uint64_t seed,
               bool inject_wrong_beta) {
    using namespace ssgp::checks;
    std::vector<CheckResult> results;
    bool matched = false;
    auto want = [&](const char* name) {
        const bool hit = suite == "all" || suite == name;
        matched = matched || hit;
        return hit;
    };

    if (want("factorization")) {
        for (auto& r : factorization_suite()) results.push_back(std::move(r));
        results.push_back(brownian_degeneration_check());
    }
    if (want("homogeneity"))
        for (auto& r : homogeneity_suite()) results.push_back(std::move(r));
    if (want("lamperti"))
        for (auto& r : lamperti_suite()) results.push_back(std::move(r));
    if (want("montecarlo"))
        for (auto& r : montecarlo_suite(McConfig{n_paths, seed}, inject_wrong_beta))
            results.push_back(std::move(r));
    if (want("equivalence")) {
        for (auto& r : equivalence_cross_route_suite()) results.push_back(std::move(r));
        for (auto& r : lemma_divergence_suite()) results.push_back(std::move(r));
    }
    if (want("density"))
        for (auto& r : density_suite(McConfig{n_paths, seed})) results.push_back(std::move(r));
    if (want("rank1"))
        for (auto& r : rank1_suite()) results.push_back(std::move(r));

    if (!matched)
        throw std::invalid_argument(
            "unknown suite '" + suite +
            "' (all | factorization | homogeneity | lamperti | montecarlo | equivalence | density | rank1)");

    bool all_pass = true;
    for (const auto& r : results) {
        std::printf("[%s] %-55s measured=%-12.5g threshold=%-10.5g %s\n",
                    r.pass ? "PASS" : "FAIL", r.name.c_str(), r.measured, r.threshold,
                    r.note.c_str());
        all_pass = all_pass && r.pass;
    }
    return all_pass ? kExitOk : kExitCheckFailed;
}

int run_lamperti(const std::string& input, double beta, bool inverse, const std::string& output,
                 bool timestamp) {
    const EnsembleData data = read_ensemble_csv(input);
    const std::size_t n_paths = data.values.rows();
    // The transform lives on strictly positive times; drop a leading t = 0
    // column (the sampler always emits one, with value 0).
    const std::size_t offset = (!inverse && !data.times.empty() && data.times.front() == 0.0) ? 1 : 0;
    const std::size_t n_times = data.times.size() - offset;
    if (n_times == 0) throw std::invalid_argument("lamperti: no usable time points");

    std::vector<double> new_times;
    Matrix out_values(n_paths, n_times);
    for (std::size_t p = 0; p < n_paths; ++p) {
        SampledPath path;
        path.times.assign(data.times.begin() + offset, data.times.end());
        path.values.resize(n_times);
        for (std::size_t j = 0; j < n_times; ++j) path.values[j] = data.values(p, j + offset);
        const SampledPath mapped = inverse ? inverse_lamperti_path(path, beta)
                                           : lamperti_path(path, beta);
        if (p == 0) new_times = mapped.times;
        for (std::size_t j = 0; j < n_times; ++j) out_values(p, j) = mapped.values[j];
    }

    std::ofstream os(output);
    if (!os) throw data_error("lamperti: cannot open " + output);
    for (std::size_t j = 0; j < n_times; ++j)
        os << (j ? "," : "") << detail::format_double(new_times[j]);
    os << "\n";
    for (std::size_t p = 0; p < n_paths; ++p) {
        for (std::size_t j = 0; j < n_times; ++j)
            os << (j ? "," : "") << detail::format_double(out_values(p, j));
        os << "\n";
    }

    std::vector<std::pair<std::string, std::string>> meta;
    meta.emplace_back("command", inverse ? "lamperti --inverse" : "lamperti");
    meta.emplace_back("input", input);
    meta.emplace_back("beta", detail::format_double(beta));
    meta.emplace_back("output", output);
    if (timestamp) {
        const std::time_t now = std::time(nullptr);
        char buf[64];
        std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
        meta.emplace_back("timestamp", buf);
    }
    write_sidecar(output + ".meta", meta);
    std::cout << "wrote " << output << " (" << n_paths << " paths)\n";
    return kExitOk;
}

int run_equivalence_demo(const std::string& output) {
    using namespace ssgp::checks;
    std::vector<CheckResult> results = equivalence_cross_route_suite();
    for (auto& r : lemma_divergence_suite()) results.push_back(std::move(r));

    bool all_pass = true;
    for (const auto& r : results) {
        std::printf("[%s] %-45s measured=%-12.5g threshold=%-10.5g %s\n",
                    r.pass ? "PASS" : "FAIL", r.name.c_str(), r.measured, r.threshold,
                    r.note.c_str());
        all_pass = all_pass && r.pass;
    }

    if (!output.empty()) {
        FFunction one;
        one.eval = [](double) { return 1.0; };
        one.name = "brownian";
        const SelfSimilarKernel brownian{0.5, one};
        std::ofstream os(output);
        if (!os) throw data_error("equivalence-demo: cannot open " + output);
        os << "l,t,s,hitsuda,factorized,rel_error\n";
        const std::vector<std::pair<std::string, PerturbationKernel>> kernels = {
            {"0", zero_perturbation()},
            {"1", constant_perturbation(1.0)},
            {"v", linear_time_perturbation()}};
        const std::vector<double> ts = {0.25, 0.5, 0.75, 1.0};
        for (const auto& [label, l] : kernels) {
            const GenericVolterraKernel kt = perturbed_kernel(brownian, l, 1e-9);
            for (std::size_t i = 0; i < ts.size(); ++i)
                for (std::size_t j = 0; j <= i; ++j) {
                    const double direct = hitsuda_w_covariance(l, ts[i], ts[j], 1e-8);
                    const double routed = factorized_covariance(kt, ts[i], ts[j], 1e-8);
                    os << label << "," << detail::format_double(ts[i]) << ","
                       << detail::format_double(ts[j]) << "," << detail::format_double(direct)
                       << "," << detail::format_double(routed) << ","
                       << detail::format_double(std::abs(routed - direct) /
                                                std::max(std::abs(direct), 1e-300))
                       << "\n";
                }
        }
        std::cout << "wrote " << output << "\n";
    }
    return all_pass ? kExitOk : kExitCheckFailed;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"self-similar Gaussian processes: canonical kernels, sampling, verification"};
    app.require_subcommand(1);

    ProcessConfig proc;
    std::string grid_text = "1.0:64";
    std::size_t n_paths = 1000;
    std::uint64_t seed = 0;
    std::string method = "volterra";
    std::string output;
    double kernel_rtol = 1e-8;
    double cov_rtol = 1e-8;
    bool timestamp = false;
    std::string config_path;

    ConfigBindings sample_cfg;
    auto add_process_options = [&](CLI::App* cmd, ConfigBindings& cfg) {
        cfg.bind_string(cmd->add_option("--process", proc.kind, "fbm | brownian | power")
                            ->capture_default_str(),
                        "process", proc.kind);
        cfg.bind_double(cmd->add_option("--hurst", proc.hurst, "Hurst index for fbm")
                            ->capture_default_str(),
                        "hurst", proc.hurst);
        cfg.bind_double(cmd->add_option("--exponent", proc.exponent,
                                        "power process: F(u) = u^exponent")
                            ->capture_default_str(),
                        "exponent", proc.exponent);
        cfg.bind_double(cmd->add_option("--beta", proc.beta,
                                        "self-similarity index for the power process")
                            ->capture_default_str(),
                        "beta", proc.beta);
        cfg.bind_string(cmd->add_option("--grid", grid_text, "uniform grid '<horizon>:<cells>'")
                            ->capture_default_str(),
                        "grid", grid_text);
        cfg.bind_flag(cmd->add_flag("--timestamp", timestamp,
                                    "record a timestamp in the sidecar"),
                      "timestamp", timestamp);
        cmd->add_option("--config", config_path, "key=value config file (flags win)");
    };

    CLI::App* sample = app.add_subcommand("sample", "generate a path ensemble CSV");
    add_process_options(sample, sample_cfg);
    sample_cfg.bind_size(sample->add_option("--paths", n_paths, "number of paths")
                             ->capture_default_str(),
                         "paths", n_paths);
    sample_cfg.bind_uint64(sample->add_option("--seed", seed, "master seed")
                               ->capture_default_str(),
                           "seed", seed);
    sample_cfg.bind_string(sample->add_option("--method", method, "volterra | cholesky")
                               ->capture_default_str(),
                           "method", method);
    sample_cfg.bind_string(sample->add_option("-o,--output", output, "output CSV path"),
                           "output", output);
    sample_cfg.bind_double(sample->add_option("--kernel-rtol", kernel_rtol,
                                              "kernel/weight quadrature tolerance")
                               ->capture_default_str(),
                           "kernel-rtol", kernel_rtol);

    std::string cov_kind = "analytic";
    bool compare = false;
    bool rank1 = false;
    double rank1_beta = 1.0;
    ConfigBindings covariance_cfg;
    CLI::App* covariance = app.add_subcommand("covariance", "emit covariance tables");
    add_process_options(covariance, covariance_cfg);
    covariance_cfg.bind_string(covariance->add_option("--kind", cov_kind,
                                                      "analytic | factorized | both")
                                   ->capture_default_str(),
                               "kind", cov_kind);
    covariance_cfg.bind_flag(covariance->add_flag("--compare", compare,
                                                  "print max relative error (kind=both)"),
                             "compare", compare);
    covariance_cfg.bind_flag(covariance->add_flag("--rank1-demo", rank1,
                                                  "rank-1 counterexample report"),
                             "rank1-demo", rank1);
    covariance_cfg.bind_double(covariance->add_option("--rank1-beta", rank1_beta,
                                                      "exponent of the rank-1 covariance")
                                   ->capture_default_str(),
                               "rank1-beta", rank1_beta);
    covariance_cfg.bind_string(covariance->add_option("-o,--output", output, "output CSV path"),
                               "output", output);
    covariance_cfg.bind_double(covariance->add_option("--cov-rtol", cov_rtol,
                                                      "factorized covariance tolerance")
                                   ->capture_default_str(),
                               "cov-rtol", cov_rtol);

    std::string suite = "all";
    std::size_t verify_paths = 20000;
    std::uint64_t verify_seed = 20260809;
    bool inject_wrong_beta = false;
    ConfigBindings verify_cfg;
    CLI::App* verify = app.add_subcommand("verify", "run the verification suites");
    verify_cfg.bind_string(
        verify->add_option("--suite", suite,
                           "all | factorization | homogeneity | lamperti | montecarlo | "
                           "equivalence | density | rank1")
            ->capture_default_str(),
        "suite", suite);
    verify_cfg.bind_size(verify->add_option("--paths", verify_paths, "Monte Carlo path count")
                             ->capture_default_str(),
                         "paths", verify_paths);
    verify_cfg.bind_uint64(verify->add_option("--seed", verify_seed, "Monte Carlo master seed")
                               ->capture_default_str(),
                           "seed", verify_seed);
    verify_cfg.bind_flag(verify->add_flag("--inject-wrong-beta", inject_wrong_beta,
                                          "debug: run the scaling test with a wrong beta "
                                          "(must fail)"),
                         "inject-wrong-beta", inject_wrong_beta);
    verify->add_option("--config", config_path, "key=value config file (flags win)");

    std::string input;
    double lamperti_beta = 0.5;
    bool inverse = false;
    ConfigBindings lamperti_cfg;
    CLI::App* lamperti_cmd = app.add_subcommand("lamperti", "transform a path ensemble CSV");
    lamperti_cfg.bind_string(lamperti_cmd->add_option("--input", input, "input ensemble CSV"),
                             "input", input);
    lamperti_cfg.bind_double(lamperti_cmd->add_option("--beta", lamperti_beta,
                                                      "self-similarity index")
                                 ->capture_default_str(),
                             "beta", lamperti_beta);
    lamperti_cfg.bind_flag(lamperti_cmd->add_flag("--inverse", inverse,
                                                  "apply the inverse transform"),
                           "inverse", inverse);
    lamperti_cfg.bind_string(lamperti_cmd->add_option("-o,--output", output, "output CSV path"),
                             "output", output);
    lamperti_cfg.bind_flag(lamperti_cmd->add_flag("--timestamp", timestamp,
                                                  "record a timestamp in the sidecar"),
                           "timestamp", timestamp);
    lamperti_cmd->add_option("--config", config_path, "key=value config file (flags win)");

    CLI::App* eq_demo = app.add_subcommand("equivalence-demo",
                                           "cross-route covariance table and divergence report");
    eq_demo->add_option("-o,--output", output, "optional CSV path for the cross-route table");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitBadConfig;
    }

    try {
        if (!config_path.empty()) {
            if (sample->parsed()) sample_cfg.apply_file(config_path);
            if (covariance->parsed()) covariance_cfg.apply_file(config_path);
            if (verify->parsed()) verify_cfg.apply_file(config_path);
            if (lamperti_cmd->parsed()) lamperti_cfg.apply_file(config_path);
        }
        if (sample->parsed()) {
            if (output.empty()) throw std::invalid_argument("sample: --output is required");
            return run_sample(proc, grid_text, n_paths, seed, method, output, kernel_rtol,
                              timestamp);
        }
        if (covariance->parsed())
            return run_covariance(proc, grid_text, cov_kind, compare, rank1, rank1_beta, output,
                                  cov_rtol, timestamp);
        if (verify->parsed())
            return run_verify(suite, verify_paths, verify_seed, inject_wrong_beta);
        if (lamperti_cmd->parsed()) {
            if (input.empty()) throw std::invalid_argument("lamperti: --input is required");
            if (output.empty()) throw std::invalid_argument("lamperti: --output is required");
            return run_lamperti(input, lamperti_beta, inverse, output, timestamp);
        }
        if (eq_demo->parsed())
            return run_equivalence_demo(output);
    } catch (const convergence_error& e) {
        std::cerr << "numeric failure: " << e.what() << "\n";
        return kExitNumericFailure;
    } catch (const not_psd_error& e) {
        std::cerr << "numeric failure: " << e.what() << "\n";
        return kExitNumericFailure;
    } catch (const data_error& e) {
        std::cerr << "numeric failure: " << e.what() << "\n";
        return kExitNumericFailure;
    } catch (const std::domain_error& e) {
        std::cerr << "bad config: " << e.what() << "\n";
        return kExitBadConfig;
    } catch (const std::invalid_argument& e) {
        std::cerr << "bad config: " << e.what() << "\n";
        return kExitBadConfig;
    } catch (const std::exception& e) {
        std::cerr << "numeric failure: " << e.what() << "\n";
        return kExitNumericFailure;
    }
    return kExitOk;
}
