#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>
#include <sys/wait.h>

#include <json.hpp>

#include "mixapprox/harness.hpp"

using namespace mixapprox;

namespace {

std::string csv_of(const Report& r)
{
    std::ostringstream s;
    write_csv(r, s);
    return s.str();
}

std::vector<std::pair<double, double>> power_law(double exponent)
{
    std::vector<std::pair<double, double>> pts;
    for (double x : {1.0, 2.0, 4.0, 8.0, 16.0}) {
        pts.emplace_back(x, 3.0 * std::pow(x, exponent));
    }
    return pts;
}

const SlopeFit& fit_named(const Report& r, const std::string& name)
{
    for (const SlopeFit& f : r.fits) {
        if (f.name == name) {
            return f;
        }
    }
    throw std::runtime_error("no fit " + name);
}

int run_cli(const std::string& args)
{
    const std::string cmd = std::string(MIXAPPROX_CLI) + " " + args + " > /dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string write_temp(const std::string& name, const std::string& text)
{
    const std::string path = std::string(TEST_TMP_DIR) + "/" + name;
    std::ofstream(path) << text;
    return path;
}

} // namespace

TEST_CASE("config parsing")
{
    const ExperimentConfig c = parse_config(R"(# comment
study = conv-rate
density.name = tent
k.list = 2, 4 ,8
grid.rule = trapezoid
fit.n = 3
fit.mean_box = -0.5, 1.5
seed = 17
)");
    CHECK(c.study == "conv-rate");
    CHECK(c.density_name == "tent");
    CHECK(c.k_list == std::vector<int>{2, 4, 8});
    CHECK(c.grid_rule == QuadratureRule::trapezoid);
    CHECK(c.n_list == std::vector<int>{3});
    REQUIRE(c.fit_mean_box.has_value());
    CHECK(c.fit_mean_box->first == -0.5);
    CHECK(c.seed == 17);

    CHECK_THROWS_AS(parse_config("colour = blue\n"), ValidationError);
    CHECK_THROWS_AS(parse_config("study = nonsense\n"), ValidationError);
    CHECK_THROWS_AS(parse_config("k.list = 2, x\n"), ValidationError);
    CHECK_THROWS_AS(parse_config("k.list = 2, -4\n"), ValidationError);
    CHECK_THROWS_AS(parse_config("replications = 0\n"), ValidationError);
    CHECK_THROWS_AS(parse_config("no equals sign\n"), ValidationError);
    CHECK_THROWS_AS(parse_config("out.format = xml\n"), ValidationError);
    CHECK_THROWS_AS(load_config("/nonexistent/file.cfg"), ValidationError);
}

TEST_CASE("loglog slope examples")
{
    CHECK(fit_loglog_slope(power_law(-1.0)).slope == doctest::Approx(-1.0).epsilon(1e-12));
    CHECK(fit_loglog_slope(power_law(0.0)).slope == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(fit_loglog_slope(power_law(-2.0)).slope == doctest::Approx(-2.0).epsilon(1e-12));
    CHECK(fit_loglog_slope(power_law(-2.0)).ci_halfwidth == doctest::Approx(0.0));
    CHECK(std::isnan(fit_loglog_slope({{1, 1}, {2, 0.5}}).ci_halfwidth));
    CHECK_THROWS_AS(fit_loglog_slope({{1, 1}}), ValidationError);
    CHECK_THROWS_AS(fit_loglog_slope({{1, 1}, {2, 0.0}}), ValidationError);
}

TEST_CASE("single k gives an undefined slope")
{
    ExperimentConfig c;
    c.study = "conv-rate";
    c.density_name = "tent";
    c.k_list = {4};
    const Report r = run_study(c);
    CHECK_FALSE(fit_named(r, "linf_vs_k").defined);
    std::ostringstream js;
    write_json(r, js);
    const auto doc = nlohmann::json::parse(js.str());
    bool saw_null = false;
    for (const auto& f : doc["fits"]) {
        saw_null = saw_null || f["slope"].is_null();
    }
    CHECK(saw_null);
}

TEST_CASE("empty report writes only the header")
{
    Report r;
    r.study = "conv-rate";
    CHECK(csv_of(r) == "study,axis,axis_value,replication,seed,metric,value\n");
}

TEST_CASE("missing list is a validation error")
{
    ExperimentConfig c;
    c.study = "conv-rate";
    CHECK_THROWS_AS(run_study(c), ValidationError);
    c.study = "mle-risk";
    c.density_name = "tent";
    c.N_list = {50};
    c.n_list = {2};
    CHECK_THROWS_AS(run_study(c), ValidationError);
}

TEST_CASE("csv and json carry the same rows")
{
    ExperimentConfig c;
    c.study = "conv-rate";
    c.density_name = "tent";
    c.k_list = {2, 4, 8, 16};
    const Report r = run_study(c);
    std::ostringstream js;
    write_json(r, js);
    const auto doc = nlohmann::json::parse(js.str());
    std::istringstream csv(csv_of(r));
    std::string line;
    std::getline(csv, line);
    std::size_t count = 0;
    for (const auto& row : doc["rows"]) {
        REQUIRE(std::getline(csv, line));
        std::ostringstream expect;
        expect << row["study"].get<std::string>() << ',' << row["axis"].get<std::string>() << ','
               << format_number(row["axis_value"].get<double>()) << ',' << row["replication"].get<int>() << ','
               << row["seed"].get<std::uint64_t>() << ',' << row["metric"].get<std::string>() << ','
               << format_number(row["value"].get<double>());
        CHECK(line == expect.str());
        ++count;
    }
    CHECK(count == r.rows.size());
    CHECK_FALSE(std::getline(csv, line));
}

TEST_CASE("lipschitz conv-rate slope")
{
    ExperimentConfig c;
    c.study = "conv-rate";
    c.density_name = "tent";
    c.k_list = {2, 4, 8, 16, 32};
    const SlopeFit tent = fit_named(run_study(c), "linf_vs_k");
    REQUIRE(tent.defined);
    CHECK(tent.slope >= -1.3);
    CHECK(tent.slope <= -0.7);

    // Inside the support the jump at the edge is invisible and the smooth-density rate shows.
    c.density_name = "truncated-normal";
    const Report tn = run_study(c);
    CHECK(fit_named(tn, "linf_interior_vs_k").slope < -1.5);
    CHECK(fit_named(tn, "l1_vs_k").slope == doctest::Approx(-1.0).epsilon(0.15));
}

TEST_CASE("greedy squared l2 slope lies in the 1/n band")
{
    ExperimentConfig c;
    c.study = "mix-rate";
    c.density_name = "truncated-normal";
    c.mix_k = 16;
    c.n_list.clear();
    for (int n = 1; n <= 32; ++n) {
        c.n_list.push_back(n);
    }
    const Report r = run_study(c);
    const SlopeFit& fit = fit_named(r, "l2sq_smooth_vs_n");
    REQUIRE(fit.defined);
    CHECK(fit.slope >= -1.35);
    CHECK(fit.slope <= -0.65);
}

TEST_CASE("small mle-risk run")
{
    ExperimentConfig c;
    c.study = "mle-risk";
    c.density_name = "truncated-normal-mixture";
    c.N_list = {100, 400};
    c.n_list = {2, 4};
    c.replications = 3;
    c.fit_k_grid = {4, 8};
    c.holdout_n = 3;
    c.holdout_N = 200;
    c.threads = 2;
    const Report r = run_study(c);
    int kl_rows = 0;
    for (const ReportRow& row : r.rows) {
        if (row.metric == "kl") {
            ++kl_rows;
            CHECK(row.value >= 0.0);
            CHECK(std::isfinite(row.value));
        }
    }
    CHECK(kl_rows >= 3 * 4);
    std::set<std::string> names;
    for (const BoundReport& b : r.bounds) {
        names.insert(b.bound_name);
        CHECK(std::isfinite(b.measured));
    }
    CHECK(names.count("mle_rate_holdout") == 1);
    CHECK(names.count("mle_expected_holdout") == 1);
    CHECK(names.count("concentration_holdout") == 1);
}

TEST_CASE("check-identity and bounds studies")
{
    ExperimentConfig c;
    c.study = "check-identity";
    c.kernel_name = "laplace";
    c.k_list = {1, 2, 4, 8, 16, 32};
    bool passed = false;
    for (const ReportRow& row : run_study(c).rows) {
        if (row.metric == "passed") {
            passed = row.value == 1.0;
        }
    }
    CHECK(passed);

    c.study = "bounds";
    c.kernel_name = "gaussian";
    c.k_list = {1, 2, 4};
    const Report b = run_study(c);
    const auto gamma = b.series("k", "gamma");
    REQUIRE(gamma.size() == 3);
    CHECK(gamma[0].second <= gamma[2].second);
}

TEST_CASE("reports are deterministic across thread counts")
{
    ExperimentConfig c;
    c.study = "mle-risk";
    c.density_name = "truncated-normal-mixture";
    c.N_list = {80, 160};
    c.n_list = {2};
    c.replications = 3;
    c.fit_k_grid = {4};
    c.holdout_n = 2;
    c.holdout_N = 100;
    c.seed = 99;
    c.threads = 1;
    const std::string one = csv_of(run_study(c));
    c.threads = 3;
    CHECK(one == csv_of(run_study(c)));
    c.seed = 100;
    CHECK(one != csv_of(run_study(c)));
}

TEST_CASE("command line exit codes")
{
    const std::string good = write_temp("good.cfg", "study = conv-rate\ndensity.name = tent\nk.list = 2, 4\n");
    const std::string bad = write_temp("bad.cfg", "study = conv-rate\nk.list = 2, four\n");
    const std::string out = std::string(TEST_TMP_DIR) + "/out.json";
    CHECK(run_cli("conv-rate --config " + good + " --format json --out " + out) == 0);
    CHECK(nlohmann::json::parse(std::ifstream(out)).contains("rows"));
    CHECK(run_cli("conv-rate --config " + bad) == 2);
    CHECK(run_cli("mix-rate --config " + good) == 2);
    CHECK(run_cli("conv-rate --config " + good + " --format xml") == 2);
    CHECK(run_cli("conv-rate") == 2);

    // Certificates fitted on two-component cells do not carry over to a one-component model.
    const std::string extrapolated = write_temp("strict.cfg", R"(study = mle-risk
density.name = truncated-normal-mixture
N.list = 40, 80, 160, 320
n.list = 2
replications = 2
fit.k_grid = 4, 8
mle.holdout_n = 1
mle.holdout_N = 5000
)");
    CHECK(run_cli("mle-risk --config " + extrapolated + " --out " + out) == 0);
    CHECK(run_cli("mle-risk --config " + extrapolated + " --out " + out + " --strict") == 3);
}
