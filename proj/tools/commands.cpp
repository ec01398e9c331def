#include "commands.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <optional>
#include <sstream>

#include "condepth/dataset.hpp"
#include "condepth/heterotest.hpp"
#include "condepth/parallel.hpp"
#include "condepth/simlab.hpp"
#include "condepth/spread.hpp"
#include "svg.hpp"

namespace condepth::cli {

namespace fs = std::filesystem;
using nlohmann::json;

std::string fmt6(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

namespace {

/// Rounds to 6 significant digits so JSON output matches the CSV text.
double r6(double v) { return std::isfinite(v) ? std::strtod(fmt6(v).c_str(), nullptr) : v; }

json r6(const Eigen::Ref<const Eigen::VectorXd>& v) {
    json a = json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(r6(v(i)));
    return a;
}

std::uint64_t default_seed() {
    const char* env = std::getenv(kSeedVariable);
    if (!env || !*env) return 1;
    try {
        std::size_t used = 0;
        const unsigned long long v = std::stoull(env, &used);
        if (used != std::string(env).size()) throw std::invalid_argument(env);
        return v;
    } catch (const std::exception&) {
        throw InputError(std::string(kSeedVariable) + " is not an unsigned integer: '" + env + "'");
    }
}

struct DataOptions {
    std::string responses;
    std::string covariates;
    std::string grid;
    bool grid_in_header = false;

    void add(CLI::App& cmd) {
        cmd.add_option("--responses", responses, "response CSV (header + one row per observation)")->required();
        cmd.add_option("--covariates", covariates, "covariate CSV (vectors, or one curve per row)")->required();
        cmd.add_option("--grid", grid, "curve grid CSV (one row of grid values)");
        cmd.add_flag("--grid-in-header", grid_in_header, "curve grid values are the covariate header");
    }
    Dataset load() const {
        DatasetFiles files{responses, covariates, std::nullopt, grid_in_header};
        if (!grid.empty()) files.grid = grid;
        return load_dataset(files);
    }
    json to_json() const {
        return {{"responses", responses}, {"covariates", covariates}, {"grid", grid}, {"grid_in_header", grid_in_header}};
    }
};

struct ModelOptions {
    std::string depth = "halfspace";
    double r = 0.5;
    std::string k = "auto";
    double bandwidth = 0.0;
    std::string kernel = "box";
    std::size_t directions = 512;
    std::uint64_t direction_seed = DepthConfig{}.seed;
    std::size_t threads = 1;

    void add(CLI::App& cmd, bool with_r = true) {
        cmd.add_option("--depth", depth, "halfspace | spatial | projection | simplicial")->capture_default_str();
        if (with_r) cmd.add_option("--r", r, "central-region mass in (0, 1)")->capture_default_str();
        cmd.add_option("--k", k, "nearest neighbours: auto = floor((ln n)^2) + 1, or a count")->capture_default_str();
        cmd.add_option("--bandwidth", bandwidth, "kernel bandwidth; selects kernel weights when set");
        cmd.add_option("--kernel", kernel, "box | epanechnikov (with --bandwidth)")->capture_default_str();
        cmd.add_option("--directions", directions, "directions scanned by approximate depths")->capture_default_str();
        cmd.add_option("--direction-seed", direction_seed, "seed of the scanned direction set")->capture_default_str();
        cmd.add_option("--threads", threads, "worker threads (0 = all cores)")->capture_default_str();
    }
    DepthKind kind() const { return parse_depth_kind(depth); }
    DepthConfig depth_config() const {
        DepthConfig cfg;
        cfg.direction_count = directions;
        cfg.seed = direction_seed;
        cfg.validate();
        return cfg;
    }
    WeightScheme weights() const {
        if (bandwidth != 0.0) {
            if (!(bandwidth > 0) || !std::isfinite(bandwidth)) throw InputError("--bandwidth must be positive");
            if (k != "auto") throw InputError("--k and --bandwidth are mutually exclusive");
            return WeightScheme::kernel_smoother(parse_kernel(kernel), bandwidth);
        }
        if (kernel != "box") throw InputError("--kernel needs --bandwidth");
        if (k == "auto") return WeightScheme::nearest_neighbors();
        try {
            std::size_t used = 0;
            const long long v = std::stoll(k, &used);
            if (used == k.size() && v >= 1) return WeightScheme::nearest_neighbors(static_cast<std::size_t>(v));
        } catch (const std::exception&) {
        }
        throw InputError("--k must be 'auto' or a positive integer (got '" + k + "')");
    }
    void check_r() const {
        if (!(r > 0 && r < 1)) throw InputError("--r must lie in (0, 1)");
    }
    json to_json(std::size_t n) const {
        const WeightScheme w = weights();
        json j{{"depth", depth}, {"r", r}, {"directions", directions}, {"direction_seed", direction_seed},
               {"threads", threads}};
        if (w.mode == WeightScheme::Mode::Kernel) {
            j["weights"] = {{"mode", "kernel"}, {"kernel", kernel}, {"bandwidth", bandwidth}};
        } else {
            j["weights"] = {{"mode", "nearest-neighbours"}, {"k", k}, {"k_used", n ? w.resolved_k(n) : 0}};
        }
        return j;
    }
};

std::vector<std::size_t> parse_queries(const std::string& spec, std::size_t n) {
    std::vector<std::size_t> out;
    if (spec == "all") {
        for (std::size_t i = 0; i < n; ++i) out.push_back(i);
        return out;
    }
    std::stringstream ss(spec);
    std::string item;
    while (std::getline(ss, item, ',')) {
        std::size_t used = 0;
        long long v = -1;
        try {
            v = std::stoll(item, &used);
        } catch (const std::exception&) {
            used = 0;
        }
        if (used != item.size() || v < 0) throw InputError("--query expects 'all' or 0-based row indices, got '" + item + "'");
        if (static_cast<std::size_t>(v) >= n) {
            throw InputError("--query index " + item + " is out of range (dataset has " + std::to_string(n) + " rows)");
        }
        out.push_back(static_cast<std::size_t>(v));
    }
    if (out.empty()) throw InputError("--query is empty");
    return out;
}

WeightVector weights_at(const Dataset& data, const WeightScheme& scheme, std::size_t i) {
    const Eigen::VectorXd x = data.covariates.values().row(static_cast<Eigen::Index>(i)).transpose();
    try {
        if (scheme.mode == WeightScheme::Mode::Kernel) {
            return kernel_weights(data.covariates, x, scheme.kernel, scheme.bandwidth);
        }
        return knn_weights(data.covariates, x, scheme.resolved_k(static_cast<std::size_t>(data.size())));
    } catch (const EmptyNeighborhoodError& e) {
        throw EmptyNeighborhoodError("observation " + std::to_string(i) + ": " + e.what());
    }
}

std::vector<std::size_t> rows_of(const WeightedLocalSample& s, const std::vector<Eigen::Index>& local) {
    std::vector<std::size_t> rows;
    for (const Eigen::Index l : local) rows.push_back(static_cast<std::size_t>(s.source[static_cast<std::size_t>(l)]));
    return rows;
}

class Outputs {
public:
    explicit Outputs(fs::path dir) : dir_(std::move(dir)) {
        std::error_code ec;
        fs::create_directories(dir_, ec);
        if (ec) throw InputError("cannot create output directory " + dir_.string() + ": " + ec.message());
    }
    void write(const std::string& name, const std::string& text) {
        std::ofstream out(dir_ / name, std::ios::binary);
        if (!out) throw InputError("cannot write " + (dir_ / name).string());
        out << text;
        if (!out) throw InputError("write failed: " + (dir_ / name).string());
        files_.push_back(name);
    }
    void write_json(const std::string& name, const json& j) { write(name, j.dump(2) + "\n"); }
    /// Registers a file written by library code.
    void record(const std::string& name) { files_.push_back(name); }
    const std::vector<std::string>& files() const { return files_; }
    const fs::path& dir() const { return dir_; }

private:
    fs::path dir_;
    std::vector<std::string> files_;
};

struct RunContext {
    std::string command;
    std::uint64_t seed = 0;
    json config = json::object();
    std::vector<std::string> warnings;
    std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();
};

void write_manifest(Outputs& out, const RunContext& ctx) {
    const double seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - ctx.start).count();
    json m{{"command", ctx.command},
           {"version", kVersion},
           {"seed", ctx.seed},
           {"config", ctx.config},
           {"warnings", ctx.warnings},
           {"outputs", out.files()},
           {"timing", {{"wall_seconds", seconds}}}};
    out.write_json("manifest.json", m);
}

Eigen::MatrixXd plane_coordinates(const Eigen::MatrixXd& pts) {
    Eigen::MatrixXd xy = Eigen::MatrixXd::Zero(pts.rows(), 2);
    xy.leftCols(std::min<Eigen::Index>(2, pts.cols())) = pts.leftCols(std::min<Eigen::Index>(2, pts.cols()));
    return xy;
}

Eigen::Vector2d plane_point(const Eigen::VectorXd& y) {
    Eigen::Vector2d q = Eigen::Vector2d::Zero();
    q.head(std::min<Eigen::Index>(2, y.size())) = y.head(std::min<Eigen::Index>(2, y.size()));
    return q;
}

std::string response_header(const Dataset& data) {
    std::string h;
    for (Eigen::Index d = 0; d < data.response_dimension(); ++d) {
        const auto idx = static_cast<std::size_t>(d);
        h += "," + (idx < data.response_names.size() ? data.response_names[idx] : "y" + std::to_string(d + 1));
    }
    return h;
}

// ---------------------------------------------------------------- depth-eval

struct DepthEvalOptions {
    DataOptions data;
    ModelOptions model;
    std::string query = "all";
    std::string points;
};

void cmd_depth_eval(const DepthEvalOptions& o, Outputs& out, RunContext& ctx, std::ostream& log) {
    const Dataset data = o.data.load();
    const auto n = static_cast<std::size_t>(data.size());
    const DepthKind kind = o.model.kind();
    const DepthConfig cfg = o.model.depth_config();
    const WeightScheme scheme = o.model.weights();
    const auto queries = parse_queries(o.query, n);
    std::optional<Eigen::MatrixXd> extra;
    if (!o.points.empty()) {
        extra = numeric_matrix(read_csv_file(o.points), o.points);
        if (extra->cols() != data.response_dimension()) {
            throw DimensionError(o.points + " has " + std::to_string(extra->cols()) + " columns, responses have " +
                                 std::to_string(data.response_dimension()));
        }
    }
    ctx.config = {{"data", o.data.to_json()}, {"model", o.model.to_json(n)}, {"query", o.query}, {"points", o.points}};
    if (!depth_is_exact(kind, data.response_dimension())) {
        ctx.warnings.push_back("depth '" + o.model.depth + "' is approximated by a direction scan at p = " +
                               std::to_string(data.response_dimension()));
    }

    std::vector<std::string> blocks(queries.size());
    parallel_for(queries.size(), o.model.threads, [&](std::size_t q) {
        const std::size_t i = queries[q];
        const WeightedLocalSample s = local_sample(data.responses, weights_at(data, scheme, i));
        std::ostringstream rows;
        const Eigen::VectorXd atoms = depth_at_points(s, kind, cfg);
        for (Eigen::Index a = 0; a < s.size(); ++a) {
            rows << i << ",atom," << s.source[static_cast<std::size_t>(a)] << ',' << fmt6(s.weights(a));
            for (Eigen::Index d = 0; d < s.dimension(); ++d) rows << ',' << fmt6(s.points(a, d));
            rows << ',' << fmt6(atoms(a)) << '\n';
        }
        if (extra) {
            const Eigen::VectorXd dv = depth_at(s, *extra, kind, cfg);
            for (Eigen::Index j = 0; j < extra->rows(); ++j) {
                rows << i << ",point," << j << ",0";
                for (Eigen::Index d = 0; d < extra->cols(); ++d) rows << ',' << fmt6((*extra)(j, d));
                rows << ',' << fmt6(dv(j)) << '\n';
            }
        }
        blocks[q] = rows.str();
    });
    std::string csv = "query,source,row,weight" + response_header(data) + ",depth\n";
    for (const auto& b : blocks) csv += b;
    out.write("depth.csv", csv);
    log << "depth-eval: " << queries.size() << " quer" << (queries.size() == 1 ? "y" : "ies") << " written to "
        << (out.dir() / "depth.csv").string() << '\n';
}

// ---------------------------------------------------------------- regions

struct RegionsOptions {
    DataOptions data;
    ModelOptions model;
    std::string query = "all";
    double trim = 0.10;
    Eigen::Index resolution = 64;
};

void cmd_regions(const RegionsOptions& o, Outputs& out, RunContext& ctx, std::ostream& log) {
    const Dataset data = o.data.load();
    const auto n = static_cast<std::size_t>(data.size());
    o.model.check_r();
    if (!(o.trim >= 0 && o.trim < 1)) throw InputError("--trim must lie in [0, 1)");
    if (o.resolution < 8) throw InputError("--resolution must be at least 8");
    const DepthKind kind = o.model.kind();
    const DepthConfig cfg = o.model.depth_config();
    const WeightScheme scheme = o.model.weights();
    const auto queries = parse_queries(o.query, n);
    const Eigen::Index p = data.response_dimension();
    ctx.config = {{"data", o.data.to_json()}, {"model", o.model.to_json(n)}, {"query", o.query},
                  {"trim", o.trim},           {"resolution", o.resolution}};
    if (!depth_is_exact(kind, p)) {
        ctx.warnings.push_back("depth '" + o.model.depth + "' is approximated by a direction scan at p = " +
                               std::to_string(p));
    }
    if (p != 2) ctx.warnings.push_back("contours are drawn for p = 2 only; SVGs show the first two coordinates");

    struct QueryOutput {
        json record;
        std::string svg;
        std::string contour_csv;
    };
    std::vector<QueryOutput> results(queries.size());
    parallel_for(queries.size(), o.model.threads, [&](std::size_t q) {
        const std::size_t i = queries[q];
        const WeightedLocalSample s = local_sample(data.responses, weights_at(data, scheme, i));
        const CentralRegion region = central_region(s, kind, cfg, o.model.r);
        const MedianResult median = conditional_median(s, kind, cfg);
        const Eigen::VectorXd tmean = trimmed_mean(s, kind, cfg, o.trim);
        QueryOutput& res = results[q];

        std::vector<Polyline> contour;
        if (p == 2) {
            contour = contour_2d(s, kind, cfg, region.alpha, region_box(s), o.resolution);
            std::ostringstream csv;
            csv << "polyline,closed,vertex,x,y\n";
            for (std::size_t l = 0; l < contour.size(); ++l) {
                for (Eigen::Index v = 0; v < contour[l].vertices.rows(); ++v) {
                    csv << l << ',' << (contour[l].closed ? 1 : 0) << ',' << v << ','
                        << fmt6(contour[l].vertices(v, 0)) << ',' << fmt6(contour[l].vertices(v, 1)) << '\n';
                }
            }
            res.contour_csv = csv.str();
        }

        ScatterPlot plot;
        plot.title = "observation " + std::to_string(i) + ": " + fmt6(100 * o.model.r) + "% central region (" +
                     o.model.depth + ")";
        plot.x_label = data.response_names.size() > 0 ? data.response_names[0] : "y1";
        plot.y_label = p > 1 && data.response_names.size() > 1 ? data.response_names[1] : (p > 1 ? "y2" : "");
        plot.points = plane_coordinates(s.points);
        plot.contour = contour;
        plot.markers.push_back({plane_point(median.point), Marker::Shape::Circle, "conditional median"});
        plot.markers.push_back({plane_point(tmean), Marker::Shape::Cross,
                                "conditional " + fmt6(100 * o.trim) + "% trimmed mean"});
        res.svg = render_svg(plot);

        json members = rows_of(s, region.members);
        res.record = {{"query", i},
                      {"local_size", s.size()},
                      {"r", o.model.r},
                      {"alpha", r6(region.alpha)},
                      {"members", members},
                      {"member_mass", r6(region.member_mass)},
                      {"median",
                       {{"point", r6(median.point)},
                        {"depth", r6(median.depth)},
                        {"policy", median.policy == MedianSearch::Atoms ? "atoms" : "atoms+grid-refinement"},
                        {"candidates", median.candidates}}},
                      {"trimmed_mean", {{"trim", o.trim}, {"point", r6(tmean)}}},
                      {"svg", "region_" + std::to_string(i) + ".svg"},
                      {"contour", p == 2 ? json("contour_" + std::to_string(i) + ".csv") : json(nullptr)}};
    });

    json records = json::array();
    for (std::size_t q = 0; q < queries.size(); ++q) {
        const std::string id = std::to_string(queries[q]);
        out.write("region_" + id + ".svg", results[q].svg);
        if (p == 2) out.write("contour_" + id + ".csv", results[q].contour_csv);
        records.push_back(results[q].record);
    }
    out.write_json("regions.json", {{"records", records}});
    log << "regions: " << queries.size() << " region" << (queries.size() == 1 ? "" : "s") << " written to "
        << out.dir().string() << '\n';
}

// ---------------------------------------------------------------- spread

struct SpreadOptions {
    DataOptions data;
    ModelOptions model;
    std::string volume = "none";
    Eigen::Index resolution = 32;
};

void cmd_spread(const SpreadOptions& o, Outputs& out, RunContext& ctx, std::ostream& log) {
    const Dataset data = o.data.load();
    const auto n = static_cast<std::size_t>(data.size());
    o.model.check_r();
    if (o.volume != "none" && o.volume != "grid" && o.volume != "hull") {
        throw InputError("--volume must be none, grid or hull");
    }
    const Eigen::Index p = data.response_dimension();
    if (o.volume != "none" && p != 2 && p != 3) {
        throw UnsupportedDimensionError("--volume needs p = 2 or 3 (responses have p = " + std::to_string(p) + ")");
    }
    if (o.volume == "grid" && o.resolution < 16) throw InputError("--resolution must be at least 16");
    const DepthKind kind = o.model.kind();
    const DepthConfig cfg = o.model.depth_config();
    const NeighborCache cache(data.covariates, o.model.weights());
    ctx.config = {{"data", o.data.to_json()}, {"model", o.model.to_json(n)}, {"volume", o.volume},
                  {"resolution", o.resolution}};
    if (!depth_is_exact(kind, p)) {
        ctx.warnings.push_back("depth '" + o.model.depth + "' is approximated by a direction scan at p = " +
                               std::to_string(p));
    }

    const PrincipalScores pcs = principal_scores(data.covariates, 2);
    if (pcs.degenerate) ctx.warnings.push_back("covariate dispersion is degenerate: principal scores are zero");

    Eigen::VectorXd delta(static_cast<Eigen::Index>(n)), volume = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n));
    std::vector<char> hull_degenerate(n, 0);
    parallel_for(n, o.model.threads, [&](std::size_t i) {
        const WeightedLocalSample s = local_sample(data.responses, cache.at(i));
        const auto ii = static_cast<Eigen::Index>(i);
        delta(ii) = spread_diameter(s, kind, cfg, o.model.r).value;
        if (o.volume == "grid") {
            volume(ii) = spread_volume_grid(s, kind, cfg, o.model.r, o.resolution).value;
        } else if (o.volume == "hull") {
            const SpreadEstimate h = spread_volume_hull(s, kind, cfg, o.model.r);
            volume(ii) = h.value;
            hull_degenerate[i] = h.degenerate ? 1 : 0;
        }
    });
    const auto degenerate = std::count(hull_degenerate.begin(), hull_degenerate.end(), 1);
    if (degenerate > 0) {
        ctx.warnings.push_back(std::to_string(degenerate) +
                               " hull volume(s) are degenerate (qualifying atoms affinely dependent)");
    }

    std::ostringstream csv;
    csv << "i,r,delta" << (o.volume != "none" ? ",volume" : "") << ",P1,P2\n";
    for (std::size_t i = 0; i < n; ++i) {
        const auto ii = static_cast<Eigen::Index>(i);
        csv << i << ',' << fmt6(o.model.r) << ',' << fmt6(delta(ii));
        if (o.volume != "none") csv << ',' << fmt6(volume(ii));
        csv << ',' << fmt6(pcs.scores(ii, 0)) << ',' << fmt6(pcs.scores(ii, 1)) << '\n';
    }
    out.write("spread.csv", csv.str());
    for (int c = 0; c < 2; ++c) {
        ScatterPlot plot;
        plot.title = "spread of the " + fmt6(100 * o.model.r) + "% central region against P" + std::to_string(c + 1);
        plot.x_label = "P" + std::to_string(c + 1);
        plot.y_label = "delta";
        plot.points.resize(static_cast<Eigen::Index>(n), 2);
        plot.points.col(0) = pcs.scores.col(c);
        plot.points.col(1) = delta;
        out.write("spread_P" + std::to_string(c + 1) + ".svg", render_svg(plot));
    }
    log << "spread: " << n << " rows written to " << (out.dir() / "spread.csv").string() << '\n';
}

// ---------------------------------------------------------------- hetero-test

struct HeteroOptions {
    DataOptions data;
    ModelOptions model;
    std::size_t permutations = 500;
    std::string rule = "strict";
};

void cmd_hetero_test(const HeteroOptions& o, Outputs& out, RunContext& ctx, std::ostream& log) {
    const Dataset data = o.data.load();
    const auto n = static_cast<std::size_t>(data.size());
    HeteroTestConfig cfg;
    cfg.kind = o.model.kind();
    cfg.depth = o.model.depth_config();
    cfg.r = o.model.r;
    cfg.weights = o.model.weights();
    cfg.permutations = o.permutations;
    cfg.seed = ctx.seed;
    cfg.rule = parse_p_value_rule(o.rule);
    cfg.threads = o.model.threads;
    ctx.config = {{"data", o.data.to_json()}, {"model", o.model.to_json(n)}, {"permutations", o.permutations},
                  {"p_rule", o.rule}};

    const HeteroTestResult res = permutation_test(data, cfg);
    ctx.warnings.insert(ctx.warnings.end(), res.warnings.begin(), res.warnings.end());
    json perm = json::array();
    for (const double t : res.perm_ts) perm.push_back(r6(t));
    json j{{"observed_t", r6(res.observed_t)},
           {"p_value", r6(res.p_value)},
           {"p_value_rule", to_string(res.rule)},
           {"permutations", res.permutations},
           {"seed", res.seed},
           {"r", res.r},
           {"depth_kind", to_string(res.kind)},
           {"depth_exact", res.depth_exact},
           {"direction_count", cfg.depth.direction_count},
           {"n", n},
           {"perm_ts", perm},
           {"observed_profile", r6(res.observed_profile)},
           {"warnings", res.warnings}};
    if (res.weights.mode == WeightScheme::Mode::Kernel) {
        j["bandwidth"] = res.weights.bandwidth;
        j["kernel"] = to_string(res.weights.kernel);
    } else {
        j["k"] = res.k;
    }
    out.write_json("hetero_test.json", j);
    log << "T_n = " << fmt6(res.observed_t) << ", p-value (" << to_string(res.rule) << ", B = " << res.permutations
        << ") = " << fmt6(res.p_value) << '\n';
}

// ---------------------------------------------------------------- simulate

struct SimulateOptions {
    int model = 1;
    double a = 0.0;
    std::size_t n = 100;
};

void cmd_simulate(const SimulateOptions& o, Outputs& out, RunContext& ctx, std::ostream& log) {
    const SimulationModel model{o.model, o.a};
    model.validate();
    if (o.n < 1) throw InputError("--n must be at least 1");
    const Dataset data = sample_model(model, o.n, ctx.seed);
    ctx.config = {{"model", o.model}, {"a", o.a}, {"n", o.n}, {"p", model.response_dimension()},
                  {"functional", model.functional()}};
    write_dataset(data, out.dir());
    out.record("responses.csv");
    out.record("covariates.csv");
    if (model.functional()) out.record("grid.csv");
    log << "simulate: model " << o.model << ", a = " << fmt6(o.a) << ", n = " << o.n << " written to "
        << out.dir().string() << '\n';
}

// ---------------------------------------------------------------- power-study

struct PowerOptions {
    ModelOptions model;
    std::vector<int> models{1};
    std::vector<std::size_t> sizes{100};
    std::vector<double> strengths{0.0, 2.0, 4.0, 6.0, 8.0};
    std::vector<double> levels{0.05};
    std::size_t replications = 200;
    std::size_t permutations = 200;
    std::string rule = "strict";
};

void cmd_power_study(const PowerOptions& o, Outputs& out, RunContext& ctx, std::ostream& log) {
    PowerStudyConfig cfg;
    cfg.models = o.models;
    cfg.sample_sizes = o.sizes;
    cfg.strengths = o.strengths;
    cfg.levels = o.levels;
    cfg.replications = o.replications;
    cfg.permutations = o.permutations;
    cfg.seed = ctx.seed;
    cfg.kind = o.model.kind();
    cfg.depth = o.model.depth_config();
    cfg.r = o.model.r;
    cfg.weights = o.model.weights();
    cfg.rule = parse_p_value_rule(o.rule);
    cfg.threads = o.model.threads;
    cfg.validate();
    ctx.config = {{"model", o.model.to_json(0)}, {"models", o.models},           {"sizes", o.sizes},
                  {"strengths", o.strengths},     {"levels", o.levels},           {"replications", o.replications},
                  {"permutations", o.permutations}, {"p_rule", o.rule}};
    for (const int id : o.models) {
        if (!depth_is_exact(cfg.kind, SimulationModel{id, 0}.response_dimension())) {
            ctx.warnings.push_back("model " + std::to_string(id) + ": depth '" + o.model.depth +
                                   "' is approximated by a scan over " + std::to_string(cfg.depth.direction_count) +
                                   " directions (seed " + std::to_string(cfg.depth.seed) + ")");
        }
    }

    const PowerTable table = power_study(cfg, [&](const PowerCell& c) {
        log << "power-study: model " << c.model << ", n = " << c.n << ", a = " << fmt6(c.a) << ", level "
            << fmt6(c.level) << ": " << fmt6(c.rate) << '\n';
    });

    std::ostringstream csv;
    csv << "model,n,level";
    for (const double a : o.strengths) csv << ",a=" << fmt6(a);
    csv << '\n';
    json cells = json::array();
    for (const int id : o.models) {
        for (const std::size_t n : o.sizes) {
            for (const double level : o.levels) {
                csv << id << ',' << n << ',' << fmt6(level);
                for (const double a : o.strengths) {
                    for (const PowerCell& c : table.rows) {
                        if (c.model == id && c.n == n && c.a == a && c.level == level) csv << ',' << fmt6(c.rate);
                    }
                }
                csv << '\n';
            }
        }
    }
    for (const PowerCell& c : table.rows) {
        json pv = json::array();
        for (const double v : c.p_values) pv.push_back(r6(v));
        cells.push_back({{"model", c.model},
                         {"n", c.n},
                         {"a", c.a},
                         {"level", c.level},
                         {"rate", r6(c.rate)},
                         {"rejections", c.rejections},
                         {"replications", c.replications},
                         {"permutations", c.permutations},
                         {"seed", c.seed},
                         {"p_values", pv}});
    }
    out.write("power.csv", csv.str());
    out.write_json("power.json", {{"cells", cells}});
}

int exit_code_for(const std::exception& e, std::ostream& err) {
    err << "error: " << e.what() << '\n';
    if (dynamic_cast<const InputError*>(&e)) return 2;
    if (dynamic_cast<const NumericalError*>(&e)) return 3;
    return 1;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Depth-based conditional regions, spread and heteroscedasticity tests", "condepth"};
    app.set_version_flag("--version", kVersion);
    app.require_subcommand(1);

    std::string out_dir = ".";
    std::optional<std::uint64_t> seed_flag;
    auto add_common = [&](CLI::App& cmd) {
        cmd.add_option("--out-dir,--out", out_dir, "output directory")->capture_default_str();
        cmd.add_option("--seed", seed_flag, std::string("random seed (default: $") + kSeedVariable + " or 1)");
    };

    std::function<void(Outputs&, RunContext&)> action;

    DepthEvalOptions de;
    auto* depth_eval = app.add_subcommand("depth-eval", "conditional depth of local responses and extra points");
    de.data.add(*depth_eval);
    de.model.add(*depth_eval, false);
    depth_eval->add_option("--query", de.query, "'all' or comma-separated 0-based rows")->capture_default_str();
    depth_eval->add_option("--points", de.points, "CSV of extra response-space points to evaluate");
    add_common(*depth_eval);
    depth_eval->callback([&] { action = [&](Outputs& o, RunContext& c) { cmd_depth_eval(de, o, c, out); }; });

    RegionsOptions rg;
    auto* regions = app.add_subcommand("regions", "central regions, medians and trimmed means at chosen rows");
    rg.data.add(*regions);
    rg.model.add(*regions);
    regions->add_option("--query", rg.query, "'all' or comma-separated 0-based rows")->capture_default_str();
    regions->add_option("--trim", rg.trim, "trimmed-mean fraction in [0, 1)")->capture_default_str();
    regions->add_option("--resolution", rg.resolution, "contour grid cells per axis")->capture_default_str();
    add_common(*regions);
    regions->callback([&] { action = [&](Outputs& o, RunContext& c) { cmd_regions(rg, o, c, out); }; });

    SpreadOptions sp;
    auto* spread = app.add_subcommand("spread", "spread profile against principal covariate scores");
    sp.data.add(*spread);
    sp.model.add(*spread);
    spread->add_option("--volume", sp.volume, "none | grid | hull")->capture_default_str();
    spread->add_option("--resolution", sp.resolution, "grid-volume cells per axis")->capture_default_str();
    add_common(*spread);
    spread->callback([&] { action = [&](Outputs& o, RunContext& c) { cmd_spread(sp, o, c, out); }; });

    HeteroOptions ht;
    auto* hetero = app.add_subcommand("hetero-test", "permutation test for heteroscedasticity");
    ht.data.add(*hetero);
    ht.model.add(*hetero);
    hetero->add_option("--permutations,-B", ht.permutations, "number of random permutations")->capture_default_str();
    hetero->add_option("--p-rule", ht.rule, "strict | addone")->capture_default_str();
    add_common(*hetero);
    hetero->callback([&] { action = [&](Outputs& o, RunContext& c) { cmd_hetero_test(ht, o, c, out); }; });

    SimulateOptions sm;
    auto* simulate = app.add_subcommand("simulate", "draw a dataset from one of the four simulation models");
    simulate->add_option("--model", sm.model, "model id 1-4")->capture_default_str();
    simulate->add_option("--a", sm.a, "heteroscedasticity strength")->capture_default_str();
    simulate->add_option("--n", sm.n, "sample size")->capture_default_str();
    add_common(*simulate);
    simulate->callback([&] { action = [&](Outputs& o, RunContext& c) { cmd_simulate(sm, o, c, out); }; });

    PowerOptions pw;
    auto* power = app.add_subcommand("power-study", "Monte Carlo level and power of the permutation test");
    pw.model.add(*power);
    power->add_option("--models", pw.models, "model ids")->delimiter(',')->capture_default_str();
    power->add_option("--sizes", pw.sizes, "sample sizes")->delimiter(',')->capture_default_str();
    power->add_option("--strengths", pw.strengths, "values of a")->delimiter(',')->capture_default_str();
    power->add_option("--levels", pw.levels, "nominal levels")->delimiter(',')->capture_default_str();
    power->add_option("--replications,-R", pw.replications, "replications per cell")->capture_default_str();
    power->add_option("--permutations,-B", pw.permutations, "permutations per replication")->capture_default_str();
    power->add_option("--p-rule", pw.rule, "strict | addone")->capture_default_str();
    add_common(*power);
    power->callback([&] { action = [&](Outputs& o, RunContext& c) { cmd_power_study(pw, o, c, err); }; });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? 0 : 2;
    }

    try {
        RunContext ctx;
        ctx.command = app.get_subcommands().front()->get_name();
        ctx.seed = seed_flag ? *seed_flag : default_seed();
        Outputs outputs(out_dir);
        action(outputs, ctx);
        for (const auto& w : ctx.warnings) err << "warning: " << w << '\n';
        write_manifest(outputs, ctx);
        return 0;
    } catch (const std::exception& e) {
        return exit_code_for(e, err);
    }
}

}  // namespace condepth::cli
