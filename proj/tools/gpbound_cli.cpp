/*
 * Copyright 2026 The gpbound Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 *
 */

#include "gpbound/gpbound.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <iostream>
#include <optional>

namespace fs = std::filesystem;
using namespace gpbound;

namespace {

constexpr const char* kVersion = "0.1.0";

struct Manifest {
    std::string command;
    std::string config;
    std::uint64_t seed = 0;
    std::string output_dir;
    std::vector<std::string> outputs;
    json extra = json::object();
};

void write_manifest(const fs::path& path, const Manifest& m, double seconds) {
    json j;
    j["command"] = m.command;
    j["config"] = m.config;
    j["seed"] = m.seed;
    j["output_dir"] = m.output_dir;
    j["tool_version"] = kVersion;
    j["wall_clock_seconds"] = seconds;
    j["outputs"] = m.outputs;
    for (auto it = m.extra.begin(); it != m.extra.end(); ++it) j[it.key()] = it.value();
    write_text_file_atomic(path, j.dump(2) + "\n");
}

std::vector<double> parse_list(const std::string& text, const std::string& what) {
    std::vector<double> v;
    std::string cell;
    std::istringstream ss(text);
    while (std::getline(ss, cell, ',')) v.push_back(parse_double(cell, what));
    if (v.empty()) throw ParseError(what + ": empty list");
    return v;
}

Vector to_vector(const std::vector<double>& v) { return Eigen::Map<const Vector>(v.data(), static_cast<Index>(v.size())); }

/// "lo:hi:n" -> n uniformly spaced 1-D points.
std::vector<Vector> parse_grid(const std::string& spec) {
    const auto c1 = spec.find(':');
    const auto c2 = spec.find(':', c1 == std::string::npos ? c1 : c1 + 1);
    if (c1 == std::string::npos || c2 == std::string::npos)
        throw ParseError("--grid expects lo:hi:n, got '" + spec + "'");
    const double lo = parse_double(spec.substr(0, c1), "--grid");
    const double hi = parse_double(spec.substr(c1 + 1, c2 - c1 - 1), "--grid");
    const double n = parse_double(spec.substr(c2 + 1), "--grid");
    if (n < 0 || n != std::floor(n)) throw ParseError("--grid point count must be a nonnegative integer");
    if (hi < lo) throw ParseError("--grid requires lo <= hi");
    return linear_grid(lo, hi, static_cast<int>(n));
}

KernelFamily family_from_flags(const std::string& name, int p, int n_x) {
    json j{{"family", name}, {"p", p}};
    if (name == "se_ard" || name == "se") j["n_x"] = n_x;
    return detail::family_from_json(j, n_x + 1);
}

json restart_table(const FitResult& r) {
    json table = json::array();
    for (const auto& rec : r.restarts) {
        json row{{"start_phi", detail::vector_to_json(rec.start_phi)},
                 {"log_likelihood", rec.failed ? json(nullptr) : json(rec.log_likelihood)},
                 {"iterations", rec.iterations},
                 {"converged", rec.converged},
                 {"failed", rec.failed}};
        if (!rec.failed) row["final_phi"] = detail::vector_to_json(rec.final_phi);
        if (!rec.error.empty()) row["error"] = rec.error;
        table.push_back(std::move(row));
    }
    return table;
}

json check_report_json(const CheckReport& r) {
    json j{{"property", r.property}, {"passed", r.passed}, {"samples", r.samples}};
    if (r.witness) {
        const auto& w = *r.witness;
        j["witness"] = {{"phi", detail::vector_to_json(w.phi)},
                        {"phi_other", detail::vector_to_json(w.phi_other)},
                        {"x", detail::vector_to_json(w.x)},
                        {"x_prime", detail::vector_to_json(w.x_prime)},
                        {"coordinate", w.coordinate},
                        {"t", w.t},
                        {"value", w.value},
                        {"value_other", w.value_other}};
    }
    return j;
}

void emit(const std::string& out, const std::string& text) {
    if (out.empty() || out == "-")
        std::cout << text;
    else
        write_text_file_atomic(out, text);
}

// ---------------------------------------------------------------------------

struct FitArgs {
    std::string data, family = "se_ard", out = "model.json";
    int p = 1;
    double noise_var = 0.01;
    int restarts = 10;
    std::uint64_t seed = 0;
};

void run_fit(const FitArgs& a) {
    const Dataset data = read_dataset_csv(a.data, Vector::Constant(1, a.noise_var));
    const KernelFamily fam = family_from_flags(a.family, a.p, static_cast<int>(data.input_dim()));
    ModelFile mf;
    mf.noise_var = data.noise_var;
    mf.data = fs::absolute(a.data).lexically_normal().string();
    mf.diagnostics = json::array();
    for (Index i = 0; i < data.output_dim(); ++i) {
        FitOptions opts;
        opts.restarts = a.restarts;
        opts.seed = stream_seed(a.seed, static_cast<std::uint64_t>(i));
        const FitResult r = fit_hyperparameters(fam, data.X, data.Y.col(i), data.noise_var[i], opts);
        mf.kernels.push_back(r.spec);
        mf.diagnostics.push_back({{"output", i + 1}, {"log_likelihood", r.log_likelihood}, {"restarts", restart_table(r)}});
    }
    emit(a.out, model_file_to_json(mf).dump(2) + "\n");
}

struct BoundArgs {
    std::string estimate, cands, truth, grid, grid_csv, method = "both", out = "bounds.csv";
    bool unsafe = false;
    int budget = 200;
    std::uint64_t seed = 0;
    int threads = 0;
};

void run_bound(const BoundArgs& a) {
    const GpModel estimate = load_model(a.estimate);
    std::optional<GpModel> truth;
    if (!a.truth.empty()) truth = load_model_on(a.truth, estimate);

    CandidateOptions copts;
    copts.unsafe = a.unsafe;
    copts.certificate_budget = a.budget;
    copts.check.seed = a.seed;
    copts.check.input_dim = static_cast<int>(estimate.data().input_dim());
    const CandidateSet cands = candidate_set_from_json(read_json_file(a.cands), copts);

    BoundOptions bopts;
    bopts.method = a.method == "thm1" ? BoundMethod::Optimization
                   : a.method == "thm2" ? BoundMethod::ClosedForm
                                        : BoundMethod::Both;
    bopts.allow_uncertified = a.unsafe;
    const BoundEngine engine(cands, estimate, bopts);

    std::vector<Vector> grid;
    if (!a.grid_csv.empty())
        grid = read_points_csv(a.grid_csv);
    else if (!a.grid.empty())
        grid = parse_grid(a.grid);
    else
        throw ConfigError("one of --grid or --grid-csv is required");

    const auto rows = bound_report(truth ? &*truth : nullptr, engine, grid, resolve_thread_count(a.threads));
    emit(a.out, bound_report_csv(rows, estimate.data().input_dim(), truth.has_value(), engine.uses_optimization(),
                                 engine.uses_closed_form()));
}

struct ValidateArgs {
    std::string truth, estimate, x, out = "oracle.json";
    std::int64_t n_samples = 200000;
    std::int64_t batch = 10000;
    std::uint64_t seed = 0;
    int threads = 0;
};

void run_validate(const ValidateArgs& a) {
    const GpModel estimate = load_model(a.estimate);
    const GpModel truth = load_model_on(a.truth, estimate);
    const Vector x = to_vector(parse_list(a.x, "--x"));
    McConfig cfg;
    cfg.n_samples = a.n_samples;
    cfg.batch = a.batch;
    cfg.seed = a.seed;
    cfg.threads = resolve_thread_count(a.threads);
    const McResult r = mc_mspe(truth, estimate, x, cfg);
    json j = mc_result_to_json(r);
    j["x"] = detail::vector_to_json(x);
    j["exact_mspe"] = exact_mspe(truth, estimate, x);
    emit(a.out, j.dump(2) + "\n");
}

struct ScenarioArgs {
    std::string config, out_dir = "scenario_out";
    std::optional<std::uint64_t> seed;
    int threads = 0;
};

void run_scenario(const ScenarioArgs& a, const std::chrono::steady_clock::time_point start) {
    std::vector<std::string> defaulted;
    ScenarioConfig cfg =
        a.config.empty() ? scenario_config_from_json(json::object(), &defaulted)
                         : scenario_config_from_json(read_json_file(a.config), &defaulted);
    for (const auto& key : defaulted) std::cerr << "{\"log\":\"default applied\",\"key\":\"" << key << "\"}\n";
    if (a.seed) cfg.seed = *a.seed;
    const unsigned threads = resolve_thread_count(a.threads);

    const Scenario sc = generate_scenario(cfg);
    const fs::path dir(a.out_dir);
    Manifest man{"scenario", a.config, cfg.seed, a.out_dir, {}, {}};

    CsvWriter train({"x_1", "y_1"});
    for (Index j = 0; j < sc.truth.size(); ++j) train.row({sc.truth.data().X(0, j), sc.truth.data().Y(j, 0)});
    write_text_file_atomic(dir / "train_data.csv", train.str());
    man.outputs.emplace_back("train_data.csv");

    const auto grid = linear_grid(cfg.grid_lower, cfg.grid_upper, cfg.grid_points);
    CsvWriter fig4({"x", "true_mean", "true_var", "est_mean", "est_var"});
    for (const auto& r : model_curves(sc, grid)) fig4.row({r.x, r.true_mean, r.true_var, r.est_mean, r.est_var});
    write_text_file_atomic(dir / "fig4_model.csv", fig4.str());
    man.outputs.emplace_back("fig4_model.csv");

    std::vector<std::string> header{"x", "exact_mspe", "est_var"};
    for (const auto& label : sc.variant_labels) header.push_back("thm2_" + label);
    CsvWriter fig5(header);
    for (const auto& r : state_space_curves(sc, grid, threads)) {
        std::vector<double> v{r.x, r.exact_mspe, r.est_var};
        v.insert(v.end(), r.bounds.begin(), r.bounds.end());
        fig5.row(v);
    }
    write_text_file_atomic(dir / "fig5_state.csv", fig5.str());
    man.outputs.emplace_back("fig5_state.csv");

    const auto trace = rollout_curves(sc, sc.variants[cfg.rollout.variant], cfg.rollout.x0, cfg.rollout.steps,
                                      cfg.rollout.follow_truth);
    CsvWriter fig5t({"tau", "x", "exact_mspe", "est_var", "thm2"});
    for (std::size_t t = 0; t < trace.states.size(); ++t)
        fig5t.row({static_cast<double>(t), trace.states[t], trace.exact_mspe[t], trace.est_var[t], trace.bound[t]});
    write_text_file_atomic(dir / "fig5_time.csv", fig5t.str());
    man.outputs.emplace_back("fig5_time.csv");

    man.extra["defaults_applied"] = defaulted;
    man.extra["estimate_kernel"] = kernel_spec_to_json(sc.fit.spec);
    man.extra["estimate_log_likelihood"] = sc.fit.log_likelihood;
    man.extra["rollout_truncated"] = trace.truncated;
    man.extra["threads"] = threads;
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    write_manifest(dir / "manifest.json", man, secs);
}

struct CheckArgs {
    std::string family = "se_ard", lower, upper, out;
    int p = 1;
    int n_x = 1;
    int budget = 1000;
    double input_radius = 10.0;
    std::uint64_t seed = 0;
};

void run_check(const CheckArgs& a) {
    const KernelFamily fam = family_from_flags(a.family, a.p, a.n_x);
    const HyperRectangle box(to_vector(parse_list(a.lower, "--lower")), to_vector(parse_list(a.upper, "--upper")));
    CheckOptions opts;
    opts.seed = a.seed;
    opts.input_radius = a.input_radius;
    opts.input_dim = a.n_x;
    const auto mono = check_componentwise_monotone(fam, box, a.budget, opts);
    const auto quasi = check_line_quasiconcave(fam, box, a.budget, opts);
    json j{{"family", fam.name()},
           {"kernel", fam.describe()},
           {"lower", detail::vector_to_json(box.lower)},
           {"upper", detail::vector_to_json(box.upper)},
           {"budget", a.budget},
           {"passed", mono.passed && quasi.passed},
           {"checks", json::array({check_report_json(mono), check_report_json(quasi)})}};
    emit(a.out, j.dump(2) + "\n");
}

void report_error(const std::string& kind, const std::string& message) {
    std::cerr << json{{"error", kind}, {"message", message}}.dump() << "\n";
}

}  // namespace

int main(int argc, char** argv) {
    const auto start = std::chrono::steady_clock::now();
    CLI::App app{"Prediction-error bounds for misspecified Gaussian process models"};
    app.set_version_flag("--version", kVersion);
    app.require_subcommand(1);

    FitArgs fit;
    auto* cfit = app.add_subcommand("fit", "Fit kernel hyperparameters by marginal likelihood");
    cfit->add_option("--data", fit.data, "CSV with x_* and y_* columns")->required();
    cfit->add_option("--family", fit.family, "se_ard | matern | rq | poly");
    cfit->add_option("--p", fit.p, "Structural parameter (Matern index, RQ shape, polynomial degree)");
    cfit->add_option("--noise-var", fit.noise_var, "Noise variance of every output");
    cfit->add_option("--restarts", fit.restarts, "Number of random restarts");
    cfit->add_option("--seed", fit.seed, "Random seed");
    cfit->add_option("--out", fit.out, "Output model JSON ('-' for stdout)");

    BoundArgs bound;
    auto* cbound = app.add_subcommand("bound", "Evaluate MSPE bounds on a grid");
    cbound->add_option("--estimate", bound.estimate, "Estimated model JSON")->required();
    cbound->add_option("--cands", bound.cands, "Candidate set JSON")->required();
    cbound->add_option("--truth", bound.truth, "Ground-truth kernel JSON (adds exact_mspe)");
    cbound->add_option("--grid", bound.grid, "1-D grid lo:hi:n");
    cbound->add_option("--grid-csv", bound.grid_csv, "CSV of test points (x_* columns)");
    cbound->add_option("--method", bound.method, "thm1 | thm2 | both")
        ->check(CLI::IsMember({"thm1", "thm2", "both"}));
    cbound->add_flag("--unsafe", bound.unsafe, "Skip kernel property certificates");
    cbound->add_option("--budget", bound.budget, "Samples per certificate check");
    cbound->add_option("--seed", bound.seed, "Random seed for certificate checks");
    cbound->add_option("--threads", bound.threads, "Worker threads (0 = all cores)");
    cbound->add_option("--out", bound.out, "Output CSV ('-' for stdout)");

    ValidateArgs val;
    auto* cval = app.add_subcommand("validate", "Monte Carlo check of the exact MSPE");
    cval->add_option("--truth", val.truth, "Ground-truth kernel JSON")->required();
    cval->add_option("--estimate", val.estimate, "Estimated model JSON")->required();
    cval->add_option("--x", val.x, "Test point, comma separated")->required();
    cval->add_option("--n-samples", val.n_samples, "Monte Carlo samples");
    cval->add_option("--batch", val.batch, "Samples per RNG stream");
    cval->add_option("--seed", val.seed, "Random seed");
    cval->add_option("--threads", val.threads, "Worker threads (0 = all cores)");
    cval->add_option("--out", val.out, "Output JSON ('-' for stdout)");

    ScenarioArgs scen;
    std::uint64_t scen_seed = 0;
    auto* cscen = app.add_subcommand("scenario", "Run the 1-D GP state-space experiment");
    cscen->add_option("--config", scen.config, "Scenario JSON (missing keys use defaults)");
    cscen->add_option("--out-dir", scen.out_dir, "Directory for CSV outputs and manifest");
    auto* seed_opt = cscen->add_option("--seed", scen_seed, "Random seed (overrides the config)");
    cscen->add_option("--threads", scen.threads, "Worker threads (0 = all cores)");

    CheckArgs chk;
    auto* cchk = app.add_subcommand("check-kernel", "Randomized monotonicity and quasi-concavity checks");
    cchk->add_option("--family", chk.family, "se_ard | matern | rq | poly");
    cchk->add_option("--p", chk.p, "Structural parameter");
    cchk->add_option("--n-x", chk.n_x, "Input dimension");
    cchk->add_option("--lower", chk.lower, "Box lower corner, comma separated")->required();
    cchk->add_option("--upper", chk.upper, "Box upper corner, comma separated")->required();
    cchk->add_option("--budget", chk.budget, "Samples per check");
    cchk->add_option("--input-radius", chk.input_radius, "Inputs drawn from [-r, r]^n_x");
    cchk->add_option("--seed", chk.seed, "Random seed");
    cchk->add_option("--out", chk.out, "Output JSON (default stdout)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        report_error("usage_error", e.what());
        return 2;
    }

    try {
        if (*cfit) run_fit(fit);
        if (*cbound) run_bound(bound);
        if (*cval) run_validate(val);
        if (*cscen) {
            if (seed_opt->count() > 0) scen.seed = scen_seed;
            run_scenario(scen, start);
        }
        if (*cchk) run_check(chk);
    } catch (const Error& e) {
        report_error(e.kind(), e.what());
        return 1;
    } catch (const std::exception& e) {
        report_error("internal_error", e.what());
        return 1;
    }
    return 0;
}
