#include <doctest.h>
#include <json.hpp>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <random>
#include <sstream>

#include "commands.hpp"
#include "condepth/dataset.hpp"
#include "condepth/regions.hpp"

using namespace condepth;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct TempDir {
    fs::path path;
    TempDir() {
        path = fs::temp_directory_path() / ("condepth-cli-" + std::to_string(std::random_device{}()));
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
    std::string operator/(const std::string& name) const { return (path / name).string(); }
};

struct Run {
    int code;
    std::string out;
    std::string err;
};

Run run(std::vector<std::string> args) {
    args.insert(args.begin(), "condepth");
    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    std::ostringstream out, err;
    const int code = cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
    return {code, out.str(), err.str()};
}

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

json read_json(const std::string& path) { return json::parse(slurp(path)); }

std::size_t count_files(const fs::path& dir, const std::string& ext) {
    std::size_t c = 0;
    for (const auto& e : fs::directory_iterator(dir)) c += e.path().extension() == ext ? 1 : 0;
    return c;
}

void write_matrix(const std::string& path, const std::string& prefix, const Eigen::MatrixXd& m) {
    std::ofstream out(path);
    for (Eigen::Index c = 0; c < m.cols(); ++c) out << (c ? "," : "") << prefix << c + 1;
    out << '\n';
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        for (Eigen::Index c = 0; c < m.cols(); ++c) out << (c ? "," : "") << format_exact(m(r, c));
        out << '\n';
    }
}

std::vector<double> ranks(const std::vector<double>& v) {
    std::vector<std::size_t> idx(v.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
    std::vector<double> r(v.size());
    for (std::size_t i = 0; i < idx.size();) {
        std::size_t j = i;
        while (j < idx.size() && v[idx[j]] == v[idx[i]]) ++j;
        for (std::size_t k = i; k < j; ++k) r[idx[k]] = 0.5 * static_cast<double>(i + j - 1);
        i = j;
    }
    return r;
}

double spearman(const std::vector<double>& a, const std::vector<double>& b) {
    const auto ra = ranks(a), rb = ranks(b);
    const double n = static_cast<double>(a.size());
    const double ma = std::accumulate(ra.begin(), ra.end(), 0.0) / n, mb = std::accumulate(rb.begin(), rb.end(), 0.0) / n;
    double sab = 0, saa = 0, sbb = 0;
    for (std::size_t i = 0; i < ra.size(); ++i) {
        sab += (ra[i] - ma) * (rb[i] - mb);
        saa += (ra[i] - ma) * (ra[i] - ma);
        sbb += (rb[i] - mb) * (rb[i] - mb);
    }
    return sab / std::sqrt(saa * sbb);
}

std::vector<std::string> data_args(const TempDir& dir, const std::string& sub = "data") {
    return {"--responses", dir / (sub + "/responses.csv"), "--covariates", dir / (sub + "/covariates.csv")};
}

std::vector<std::string> concat(std::vector<std::string> a, const std::vector<std::string>& b) {
    a.insert(a.end(), b.begin(), b.end());
    return a;
}

}  // namespace

TEST_CASE("simulate writes a loadable dataset and a manifest") {
    TempDir dir;
    const Run r = run({"simulate", "--model", "3", "--a", "2", "--n", "25", "--seed", "4", "--out-dir", dir / "data"});
    REQUIRE(r.code == 0);
    const json m = read_json(dir / "data/manifest.json");
    CHECK(m["command"] == "simulate");
    CHECK(m["seed"] == 4);
    CHECK(m["version"] == cli::kVersion);
    CHECK(m.contains("timing"));
    const Dataset data = load_dataset({dir / "data/responses.csv", dir / "data/covariates.csv",
                                       fs::path(dir / "data/grid.csv"), false});
    CHECK(data.size() == 25);
    CHECK(data.covariates.kind() == CovariateKind::Curve);
}

TEST_CASE("default seed comes from the environment") {
    TempDir dir;
    ::setenv(cli::kSeedVariable, "77", 1);
    REQUIRE(run({"simulate", "--n", "5", "--out-dir", dir / "a"}).code == 0);
    CHECK(read_json(dir / "a/manifest.json")["seed"] == 77);
    REQUIRE(run({"simulate", "--n", "5", "--seed", "8", "--out-dir", dir / "b"}).code == 0);
    CHECK(read_json(dir / "b/manifest.json")["seed"] == 8);
    ::setenv(cli::kSeedVariable, "seventy", 1);
    CHECK(run({"simulate", "--n", "5", "--out-dir", dir / "c"}).code == 2);
    ::unsetenv(cli::kSeedVariable);
    REQUIRE(run({"simulate", "--n", "5", "--out-dir", dir / "d"}).code == 0);
    CHECK(read_json(dir / "d/manifest.json")["seed"] == 1);
}

TEST_CASE("regions: one SVG and one record per query, median matches the library") {
    TempDir dir;
    REQUIRE(run({"simulate", "--model", "1", "--a", "1", "--n", "80", "--seed", "2", "--out-dir", dir / "data"}).code == 0);
    const Run r = run(concat({"regions", "--query", "5", "--out-dir", dir / "reg"}, data_args(dir)));
    REQUIRE(r.code == 0);
    CHECK(count_files(dir / "reg", ".svg") == 1);
    const json regions = read_json(dir / "reg/regions.json");
    REQUIRE(regions["records"].size() == 1);
    const json& rec = regions["records"][0];
    CHECK(rec["query"] == 5);
    CHECK(fs::exists(dir / "reg/contour_5.csv"));
    CHECK(slurp(dir / "reg/region_5.svg").find("<svg") == 0);

    const Dataset data = load_dataset({dir / "data/responses.csv", dir / "data/covariates.csv", std::nullopt, false});
    const Eigen::VectorXd x = data.covariates.values().row(5).transpose();
    const auto s = local_sample(data.responses, knn_weights(data.covariates, x, default_k(80)));
    const auto median = conditional_median(s, DepthKind::Halfspace, {});
    for (Eigen::Index d = 0; d < 2; ++d) {
        CHECK(rec["median"]["point"][static_cast<std::size_t>(d)].get<double>() == doctest::Approx(median.point(d)).epsilon(1e-5));
    }
    const auto region = central_region(s, DepthKind::Halfspace, {}, 0.5);
    CHECK(rec["members"].size() == region.members.size());
    CHECK(rec["alpha"].get<double>() == doctest::Approx(region.alpha).epsilon(1e-5));

    const Run all = run(concat({"regions", "--query", "all", "--resolution", "16", "--out-dir", dir / "all"}, data_args(dir)));
    REQUIRE(all.code == 0);
    CHECK(count_files(dir / "all", ".svg") == 80);
    CHECK(run(concat({"regions", "--query", "80", "--out-dir", dir / "bad"}, data_args(dir))).code == 2);
    CHECK(run(concat({"regions", "--query", "x", "--out-dir", dir / "bad"}, data_args(dir))).code == 2);
}

TEST_CASE("regions: symmetric local cloud puts median and trimmed mean together") {
    TempDir dir;
    fs::create_directories(dir / "sym");
    std::mt19937_64 rng(3);
    std::normal_distribution<double> normal;
    Eigen::MatrixXd y(41, 2);
    y.row(0).setZero();
    for (Eigen::Index i = 1; i < 41; i += 2) {
        y(i, 0) = normal(rng);
        y(i, 1) = normal(rng);
        y.row(i + 1) = -y.row(i);
    }
    write_matrix(dir / "sym/responses.csv", "y", y);
    write_matrix(dir / "sym/covariates.csv", "x", Eigen::MatrixXd::Zero(41, 1));
    const Run r = run(concat({"regions", "--query", "0", "--out-dir", dir / "out"}, data_args(dir, "sym")));
    REQUIRE(r.code == 0);
    const json rec = read_json(dir / "out/regions.json")["records"][0];
    CHECK(rec["local_size"] == 41);
    const double extent = (y.colwise().maxCoeff() - y.colwise().minCoeff()).maxCoeff();
    for (std::size_t d = 0; d < 2; ++d) {
        const double gap = rec["median"]["point"][d].get<double>() - rec["trimmed_mean"]["point"][d].get<double>();
        CHECK(std::abs(gap) <= 0.01 * extent);
    }
}

TEST_CASE("spread: one row per observation with principal scores") {
    TempDir dir;
    REQUIRE(run({"simulate", "--model", "3", "--a", "8", "--n", "200", "--seed", "11", "--out-dir", dir / "data"}).code == 0);
    const Run r = run(concat({"spread", "--grid", dir / "data/grid.csv", "--out-dir", dir / "sp"}, data_args(dir)));
    REQUIRE(r.code == 0);
    std::istringstream csv(slurp(dir / "sp/spread.csv"));
    const CsvTable t = read_csv(csv, "spread.csv");
    CHECK(t.header == std::vector<std::string>{"i", "r", "delta", "P1", "P2"});
    REQUIRE(t.rows.size() == 200);
    std::vector<double> delta, p1;
    for (const auto& row : t.rows) {
        delta.push_back(std::stod(row[2]));
        p1.push_back(std::stod(row[3]));
    }
    const double rho = spearman(delta, p1);
    MESSAGE("rank correlation of delta and P1: " << rho);
    CHECK(rho > 0.3);
    CHECK(fs::exists(dir / "sp/spread_P1.svg"));
    CHECK(fs::exists(dir / "sp/spread_P2.svg"));

    fs::create_directories(dir / "flat");
    write_matrix(dir / "flat/responses.csv", "y", Eigen::MatrixXd::Random(30, 2));
    write_matrix(dir / "flat/covariates.csv", "x", Eigen::MatrixXd::Ones(30, 2));
    const Run flat = run(concat({"spread", "--volume", "grid", "--out-dir", dir / "flat-out"}, data_args(dir, "flat")));
    REQUIRE(flat.code == 0);
    const json m = read_json(dir / "flat-out/manifest.json");
    CHECK(m["warnings"].dump().find("degenerate") != std::string::npos);
    std::istringstream fcsv(slurp(dir / "flat-out/spread.csv"));
    const CsvTable ft = read_csv(fcsv, "spread.csv");
    CHECK(ft.header[3] == "volume");
    for (const auto& row : ft.rows) {
        CHECK(std::stod(row[4]) == 0.0);
        CHECK(std::stod(row[5]) == 0.0);
    }
}

TEST_CASE("hetero-test: reproducible JSON and power against strong heteroscedasticity") {
    TempDir dir;
    REQUIRE(run({"simulate", "--model", "1", "--a", "8", "--n", "200", "--seed", "21", "--out-dir", dir / "data"}).code == 0);
    const auto args = concat({"hetero-test", "--permutations", "200", "--seed", "5"}, data_args(dir));
    REQUIRE(run(concat(args, {"--out-dir", dir / "a"})).code == 0);
    REQUIRE(run(concat(args, {"--out-dir", dir / "b", "--threads", "3"})).code == 0);
    CHECK(slurp(dir / "a/hetero_test.json") == slurp(dir / "b/hetero_test.json"));
    const json res = read_json(dir / "a/hetero_test.json");
    CHECK(res["p_value"].get<double>() <= 0.01);
    CHECK(res["k"] == 29);
    CHECK(res["perm_ts"].size() == 200);
    CHECK(res["p_value_rule"] == "strict");
    const json m = read_json(dir / "a/manifest.json");
    CHECK(m["config"]["permutations"] == 200);
    CHECK(m["config"]["model"]["depth"] == "halfspace");
}

TEST_CASE("exit codes") {
    TempDir dir;
    REQUIRE(run({"simulate", "--n", "30", "--out-dir", dir / "data"}).code == 0);
    CHECK(run({"hetero-test", "--responses", dir / "missing.csv", "--covariates", dir / "data/covariates.csv"}).code == 2);
    CHECK(run(concat({"hetero-test", "--r", "1.5", "--out-dir", dir / "o"}, data_args(dir))).code == 2);
    CHECK(run(concat({"hetero-test", "--depth", "zonoid", "--out-dir", dir / "o"}, data_args(dir))).code == 2);
    CHECK(run(concat({"hetero-test", "--k", "0", "--out-dir", dir / "o"}, data_args(dir))).code == 2);
    CHECK(run({"no-such-command"}).code == 2);
    CHECK(run({"--help"}).code == 0);
    CHECK(run({"spread"}).code == 2);

    fs::create_directories(dir / "flat");
    write_matrix(dir / "flat/responses.csv", "y", Eigen::MatrixXd::Ones(20, 2));
    write_matrix(dir / "flat/covariates.csv", "x", Eigen::MatrixXd::Random(20, 1));
    const Run numeric = run(concat({"spread", "--depth", "projection", "--out-dir", dir / "o"}, data_args(dir, "flat")));
    CHECK(numeric.code == 3);
    CHECK(numeric.err.find("MAD") != std::string::npos);
    CHECK(run(concat({"hetero-test", "--bandwidth", "0.5", "--kernel", "gauss", "--out-dir", dir / "o"},
                     data_args(dir))).code == 2);
}

TEST_CASE("depth-eval and power-study outputs") {
    TempDir dir;
    REQUIRE(run({"simulate", "--n", "40", "--out-dir", dir / "data"}).code == 0);
    {
        std::ofstream pts(dir / "points.csv");
        pts << "y1,y2\n0,0\n50,50\n";
    }
    const Run d = run(concat({"depth-eval", "--query", "0,1", "--points", dir / "points.csv", "--out-dir", dir / "de"},
                             data_args(dir)));
    REQUIRE(d.code == 0);
    std::istringstream csv(slurp(dir / "de/depth.csv"));
    const CsvTable t = read_csv(csv, "depth.csv");
    CHECK(t.header.back() == "depth");
    std::size_t far = 0;
    for (const auto& row : t.rows) {
        if (row[1] == "point" && row[2] == "1") {
            CHECK(row.back() == "0");
            ++far;
        }
    }
    CHECK(far == 2);

    const Run p = run({"power-study", "--models", "1", "--sizes", "20", "--strengths", "0,8", "--levels", "0.05,0.1",
                       "-R", "4", "-B", "9", "--seed", "3", "--out-dir", dir / "pw"});
    REQUIRE(p.code == 0);
    std::istringstream pcsv(slurp(dir / "pw/power.csv"));
    const CsvTable pt = read_csv(pcsv, "power.csv");
    CHECK(pt.header == std::vector<std::string>{"model", "n", "level", "a=0", "a=8"});
    CHECK(pt.rows.size() == 2);
    CHECK(read_json(dir / "pw/power.json")["cells"].size() == 4);
}
