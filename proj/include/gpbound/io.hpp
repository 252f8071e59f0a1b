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

#ifndef GPBOUND_IO_HPP
#define GPBOUND_IO_HPP

#include "gpbound/bound_engine.hpp"
#include "gpbound/gpssm_sim.hpp"
#include "gpbound/oracle.hpp"

#include <json.hpp>

#include <charconv>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace gpbound {

using json = nlohmann::json;

// ---------------------------------------------------------------------------
// Numbers
// ---------------------------------------------------------------------------

/// Shortest decimal string that parses back to exactly `v`.
[[nodiscard]] inline std::string format_double(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return {buf, res.ptr};
}

[[nodiscard]] inline double parse_double(std::string_view text, const std::string& where) {
    while (!text.empty() && (text.front() == ' ' || text.front() == '\t')) text.remove_prefix(1);
    while (!text.empty() && (text.back() == ' ' || text.back() == '\t' || text.back() == '\r')) text.remove_suffix(1);
    double v = 0.0;
    const auto res = std::from_chars(text.data(), text.data() + text.size(), v);
    if (res.ec != std::errc() || res.ptr != text.data() + text.size())
        throw ParseError(where + ": cannot parse '" + std::string(text) + "' as a number");
    return v;
}

// ---------------------------------------------------------------------------
// Kernels and candidate sets
// ---------------------------------------------------------------------------

namespace detail {

inline Vector json_to_vector(const json& j, const std::string& what) {
    if (!j.is_array()) throw ParseError(what + " must be an array of numbers");
    Vector v(static_cast<Index>(j.size()));
    for (std::size_t i = 0; i < j.size(); ++i) {
        if (!j[i].is_number()) throw ParseError(what + " must be an array of numbers");
        v[static_cast<Index>(i)] = j[i].get<double>();
    }
    return v;
}

inline json vector_to_json(const Vector& v) {
    json a = json::array();
    for (Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
    return a;
}

/// Family from {"family": ..., "p": ...}; SE-ARD takes n_x from the
/// hyperparameter vector length.
inline KernelFamily family_from_json(const json& j, Index hyper_len) {
    if (!j.is_object() || !j.contains("family") || !j["family"].is_string())
        throw ParseError("kernel object needs a string field 'family'");
    const auto name = j["family"].get<std::string>();
    const int p = j.contains("p") ? j["p"].get<int>() : 1;
    KernelFamily f;
    if (name == "poly")
        f = KernelFamily::polynomial(p);
    else if (name == "rq")
        f = KernelFamily::rational_quadratic(p);
    else if (name == "matern")
        f = KernelFamily::matern(j.contains("p") ? p : 1);
    else if (name == "se_ard" || name == "se")
        f = KernelFamily::se_ard(static_cast<int>(j.contains("n_x") ? j["n_x"].get<int>() : hyper_len - 1));
    else
        throw ParseError("unknown kernel family '" + name + "' (expected se_ard, matern, rq or poly)");
    f.validate();
    return f;
}

inline void family_to_json(const KernelFamily& f, json& j) {
    j["family"] = f.name();
    if (f.kind != Family::SquaredExponentialArd) j["p"] = f.p;
}

}  // namespace detail

[[nodiscard]] inline json kernel_spec_to_json(const KernelSpec& spec) {
    json j;
    detail::family_to_json(spec.family, j);
    j["phi"] = detail::vector_to_json(spec.phi);
    return j;
}

[[nodiscard]] inline KernelSpec kernel_spec_from_json(const json& j) {
    if (!j.is_object() || !j.contains("phi")) throw ParseError("kernel spec needs a 'phi' array");
    const Vector phi = detail::json_to_vector(j["phi"], "phi");
    return {detail::family_from_json(j, phi.size()), phi};
}

[[nodiscard]] inline json candidate_set_to_json(const CandidateSet& cands) {
    json a = json::array();
    for (const auto& e : cands.entries()) {
        json j;
        detail::family_to_json(e.family, j);
        j["lower"] = detail::vector_to_json(e.box.lower);
        j["upper"] = detail::vector_to_json(e.box.upper);
        a.push_back(std::move(j));
    }
    return a;
}

[[nodiscard]] inline std::vector<std::pair<KernelFamily, HyperRectangle>> candidate_entries_from_json(const json& j) {
    if (!j.is_array()) throw ParseError("candidate set must be a JSON array");
    std::vector<std::pair<KernelFamily, HyperRectangle>> entries;
    for (const auto& e : j) {
        if (!e.contains("lower") || !e.contains("upper"))
            throw ParseError("candidate entry needs 'lower' and 'upper' arrays");
        const Vector lo = detail::json_to_vector(e["lower"], "lower");
        const Vector hi = detail::json_to_vector(e["upper"], "upper");
        entries.emplace_back(detail::family_from_json(e, lo.size()), HyperRectangle(lo, hi));
    }
    return entries;
}

[[nodiscard]] inline CandidateSet candidate_set_from_json(const json& j, const CandidateOptions& opts = {}) {
    return CandidateSet(candidate_entries_from_json(j), opts);
}

[[nodiscard]] inline json mc_result_to_json(const McResult& r) {
    return {{"estimate", r.estimate}, {"std_error", r.std_error}, {"n_samples", r.n_samples}, {"seed", r.seed}};
}

// ---------------------------------------------------------------------------
// Files
// ---------------------------------------------------------------------------

[[nodiscard]] inline std::string read_text_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError("cannot open '" + path.string() + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

[[nodiscard]] inline json read_json_file(const std::filesystem::path& path) {
    const std::string text = read_text_file(path);
    try {
        return json::parse(text);
    } catch (const json::parse_error& e) {
        throw ParseError(path.string() + ": " + e.what());
    }
}

/// Writes via a temporary file and a rename so readers never see partial output.
inline void write_text_file_atomic(const std::filesystem::path& path, const std::string& text) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    const auto tmp = std::filesystem::path(path.string() + ".tmp");
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw Error("io_error", "cannot write '" + tmp.string() + "'");
        out << text;
        if (!out) throw Error("io_error", "write to '" + tmp.string() + "' failed");
    }
    std::filesystem::rename(tmp, path);
}

// ---------------------------------------------------------------------------
// CSV
// ---------------------------------------------------------------------------

/// Parsed numeric CSV with a mandatory header row.
struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<double>> rows;

    [[nodiscard]] std::vector<std::size_t> columns_with_prefix(char prefix) const {
        std::vector<std::size_t> idx;
        for (std::size_t c = 0; c < header.size(); ++c)
            if (!header[c].empty() && header[c][0] == prefix) idx.push_back(c);
        return idx;
    }
};

namespace detail {

inline std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> cells;
    std::string cell;
    std::istringstream ss(line);
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    return cells;
}

inline std::string trim(std::string s) {
    const auto b = s.find_first_not_of(" \t\r");
    const auto e = s.find_last_not_of(" \t\r");
    return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
}

}  // namespace detail

[[nodiscard]] inline CsvTable parse_csv(const std::string& text, const std::string& source = "csv") {
    CsvTable t;
    std::istringstream in(text);
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (detail::trim(line).empty()) continue;
        auto cells = detail::split_csv_line(line);
        if (t.header.empty()) {
            for (auto& c : cells) t.header.push_back(detail::trim(c));
            continue;
        }
        const std::string where = source + ":" + std::to_string(line_no);
        if (cells.size() != t.header.size())
            throw ParseError(where + ": expected " + std::to_string(t.header.size()) + " fields, found " +
                             std::to_string(cells.size()));
        std::vector<double> row;
        row.reserve(cells.size());
        for (const auto& c : cells) row.push_back(parse_double(c, where));
        t.rows.push_back(std::move(row));
    }
    if (t.header.empty()) throw ParseError(source + ": file is empty (a header row is required)");
    return t;
}

/// Dataset from columns x_1..x_n (inputs) and y_1..y_k (outputs).
[[nodiscard]] inline Dataset dataset_from_csv(const CsvTable& t, const Vector& noise_var, const std::string& source) {
    const auto xs = t.columns_with_prefix('x');
    const auto ys = t.columns_with_prefix('y');
    if (xs.empty() || ys.empty()) throw ParseError(source + ": header needs x_* input and y_* output columns");
    if (t.rows.empty()) throw ParseError(source + ": no data rows");
    const auto m = static_cast<Index>(t.rows.size());
    Matrix X(static_cast<Index>(xs.size()), m);
    Matrix Y(m, static_cast<Index>(ys.size()));
    for (Index r = 0; r < m; ++r) {
        const auto& row = t.rows[static_cast<std::size_t>(r)];
        for (std::size_t c = 0; c < xs.size(); ++c) X(static_cast<Index>(c), r) = row[xs[c]];
        for (std::size_t c = 0; c < ys.size(); ++c) Y(r, static_cast<Index>(c)) = row[ys[c]];
    }
    Vector noise = noise_var;
    if (noise.size() == 1 && ys.size() > 1) noise = Vector::Constant(static_cast<Index>(ys.size()), noise_var[0]);
    return {X, Y, noise};
}

[[nodiscard]] inline Dataset read_dataset_csv(const std::filesystem::path& path, const Vector& noise_var) {
    return dataset_from_csv(parse_csv(read_text_file(path), path.string()), noise_var, path.string());
}

/// Test points from the x_* columns of a CSV.
[[nodiscard]] inline std::vector<Vector> read_points_csv(const std::filesystem::path& path) {
    const auto t = parse_csv(read_text_file(path), path.string());
    const auto xs = t.columns_with_prefix('x');
    if (xs.empty()) throw ParseError(path.string() + ": header needs x_* columns");
    std::vector<Vector> pts;
    for (const auto& row : t.rows) {
        Vector x(static_cast<Index>(xs.size()));
        for (std::size_t c = 0; c < xs.size(); ++c) x[static_cast<Index>(c)] = row[xs[c]];
        pts.push_back(std::move(x));
    }
    return pts;
}

/// Builds CSV text with full round-trip precision.
class CsvWriter {
public:
    explicit CsvWriter(const std::vector<std::string>& header) {
        for (std::size_t i = 0; i < header.size(); ++i) out_ << (i ? "," : "") << header[i];
        out_ << '\n';
    }

    void row(const std::vector<double>& values) {
        for (std::size_t i = 0; i < values.size(); ++i) out_ << (i ? "," : "") << format_double(values[i]);
        out_ << '\n';
    }

    [[nodiscard]] std::string str() const { return out_.str(); }

private:
    std::ostringstream out_;
};

[[nodiscard]] inline std::string bound_report_csv(const std::vector<BoundReport>& rows, Index input_dim,
                                                  bool with_truth, bool with_thm1, bool with_thm2) {
    std::vector<std::string> header;
    for (Index d = 0; d < input_dim; ++d) header.push_back("x_" + std::to_string(d + 1));
    if (with_truth) header.emplace_back("exact_mspe");
    header.emplace_back("est_var_trace");
    if (with_thm1) header.emplace_back("thm1");
    if (with_thm2) header.emplace_back("thm2");
    CsvWriter w(header);
    for (const auto& r : rows) {
        std::vector<double> v(r.x.data(), r.x.data() + r.x.size());
        if (with_truth) v.push_back(r.exact_mspe.value_or(std::nan("")));
        v.push_back(r.est_var_trace);
        if (with_thm1) v.push_back(r.thm1.value_or(std::nan("")));
        if (with_thm2) v.push_back(r.thm2.value_or(std::nan("")));
        w.row(v);
    }
    return w.str();
}

// ---------------------------------------------------------------------------
// Model files: {"kernels": [...], "noise_var": [...], "data": "path.csv"}
// ---------------------------------------------------------------------------

struct ModelFile {
    std::vector<KernelSpec> kernels;
    Vector noise_var;
    std::string data;  ///< CSV path as stored in the file
    json diagnostics;
};

[[nodiscard]] inline json model_file_to_json(const ModelFile& m) {
    json j;
    j["kernels"] = json::array();
    for (const auto& k : m.kernels) j["kernels"].push_back(kernel_spec_to_json(k));
    j["noise_var"] = detail::vector_to_json(m.noise_var);
    j["data"] = m.data;
    if (!m.diagnostics.is_null()) j["diagnostics"] = m.diagnostics;
    return j;
}

[[nodiscard]] inline ModelFile model_file_from_json(const json& j) {
    ModelFile m;
    if (!j.is_object()) throw ParseError("model file must be a JSON object");
    if (j.contains("kernels")) {
        for (const auto& k : j["kernels"]) m.kernels.push_back(kernel_spec_from_json(k));
    } else if (j.contains("kernel")) {
        m.kernels.push_back(kernel_spec_from_json(j["kernel"]));
    } else {
        throw ParseError("model file needs 'kernels' (or 'kernel')");
    }
    if (j.contains("noise_var")) {
        m.noise_var = j["noise_var"].is_number() ? Vector::Constant(1, j["noise_var"].get<double>())
                                                 : detail::json_to_vector(j["noise_var"], "noise_var");
    }
    if (j.contains("data")) m.data = j["data"].get<std::string>();
    if (j.contains("diagnostics")) m.diagnostics = j["diagnostics"];
    return m;
}

/// Loads a model file and its data CSV. Relative data paths are resolved
/// against the model file's directory.
[[nodiscard]] inline GpModel load_model(const std::filesystem::path& path) {
    const ModelFile mf = model_file_from_json(read_json_file(path));
    if (mf.data.empty()) throw ParseError(path.string() + ": model file has no 'data' reference");
    std::filesystem::path data_path(mf.data);
    if (data_path.is_relative()) data_path = path.parent_path() / data_path;
    Vector noise = mf.noise_var.size() > 0 ? mf.noise_var : Vector::Constant(1, 0.0);
    const Dataset data = read_dataset_csv(data_path, noise);
    std::vector<KernelSpec> kernels = mf.kernels;
    if (kernels.size() == 1 && data.output_dim() > 1)
        kernels.assign(static_cast<std::size_t>(data.output_dim()), mf.kernels.front());
    return {kernels, data};
}

/// Model with a data file but kernels taken from `kernel_file` (the data
/// reference there, if any, is ignored). Used for ground-truth models that
/// must share the estimate's training inputs.
[[nodiscard]] inline GpModel load_model_on(const std::filesystem::path& kernel_file, const GpModel& reference) {
    const ModelFile mf = model_file_from_json(read_json_file(kernel_file));
    std::vector<KernelSpec> kernels = mf.kernels;
    if (kernels.size() == 1 && reference.outputs() > 1)
        kernels.assign(static_cast<std::size_t>(reference.outputs()), mf.kernels.front());
    Dataset data = reference.data();
    if (mf.noise_var.size() > 0) {
        data.noise_var = mf.noise_var.size() == 1 && reference.outputs() > 1
                             ? Vector::Constant(reference.outputs(), mf.noise_var[0])
                             : mf.noise_var;
    }
    return {kernels, data};
}

// ---------------------------------------------------------------------------
// Scenario configuration
// ---------------------------------------------------------------------------

/// Reads a scenario JSON. Keys that are absent keep their defaults and are
/// listed in `defaulted`.
[[nodiscard]] inline ScenarioConfig scenario_config_from_json(const json& j, std::vector<std::string>* defaulted = nullptr) {
    if (!j.is_object()) throw ParseError("scenario config must be a JSON object");
    ScenarioConfig c;
    auto missing = [&](const char* key) {
        if (j.contains(key)) return false;
        if (defaulted) defaulted->emplace_back(key);
        return true;
    };
    auto pair = [](const json& v, const char* key) {
        if (!v.is_array() || v.size() != 2) throw ParseError(std::string(key) + " must be [lower, upper]");
        return std::pair<double, double>{v[0].get<double>(), v[1].get<double>()};
    };
    try {
        if (!missing("truth_kernel")) c.truth_kernel = kernel_spec_from_json(j["truth_kernel"]);
        if (!missing("estimate_family")) c.estimate_family = detail::family_from_json(j["estimate_family"], 2);
        if (!missing("n_train")) c.n_train = j["n_train"].get<int>();
        if (!missing("train_range")) std::tie(c.train_lower, c.train_upper) = pair(j["train_range"], "train_range");
        if (!missing("noise_var")) c.noise_var = j["noise_var"].get<double>();
        if (!missing("eval_grid")) {
            const auto& g = j["eval_grid"];
            if (g.contains("range")) std::tie(c.grid_lower, c.grid_upper) = pair(g["range"], "eval_grid.range");
            if (g.contains("points")) c.grid_points = g["points"].get<int>();
        }
        if (!missing("interval_scales")) {
            c.interval_scales.clear();
            for (const auto& s : j["interval_scales"]) {
                const auto [lo, hi] = pair(s, "interval_scales entry");
                c.interval_scales.push_back({lo, hi});
            }
        }
        if (!missing("fixed_candidates")) c.fixed_candidates = candidate_entries_from_json(j["fixed_candidates"]);
        if (!missing("fit")) {
            const auto& f = j["fit"];
            if (f.contains("restarts")) c.fit.restarts = f["restarts"].get<int>();
            if (f.contains("start_range")) std::tie(c.fit.start_lower, c.fit.start_upper) = pair(f["start_range"], "fit.start_range");
            if (f.contains("bounds")) std::tie(c.fit.bound_lower, c.fit.bound_upper) = pair(f["bounds"], "fit.bounds");
        }
        if (!missing("rollout")) {
            const auto& r = j["rollout"];
            if (r.contains("x0")) c.rollout.x0 = r["x0"].get<double>();
            if (r.contains("steps")) c.rollout.steps = r["steps"].get<int>();
            if (r.contains("follow")) {
                const auto f = r["follow"].get<std::string>();
                if (f != "estimate" && f != "truth") throw ParseError("rollout.follow must be 'estimate' or 'truth'");
                c.rollout.follow_truth = f == "truth";
            }
            if (r.contains("variant")) c.rollout.variant = r["variant"].get<std::size_t>();
        }
        if (!missing("seed")) c.seed = j["seed"].get<std::uint64_t>();
        if (!missing("certificate_budget")) c.certificate_budget = j["certificate_budget"].get<int>();
    } catch (const json::exception& e) {
        throw ParseError(std::string("scenario config: ") + e.what());
    }
    c.validate();
    return c;
}

}  // namespace gpbound

#endif  // GPBOUND_IO_HPP
