#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "mixapprox/bounds.hpp"
#include "mixapprox/common.hpp"
#include "mixapprox/grid.hpp"

namespace mixapprox {

/// Flat `key = value` configuration. Lists are comma separated; `#` starts a comment.
struct ExperimentConfig {
    std::string study;
    std::string density_name = "truncated-normal";
    int density_dim = 1;
    std::string kernel_name = "gaussian";
    int grid_points = 0;  // 0 selects the per-dimension default
    QuadratureRule grid_rule = QuadratureRule::simpson;
    double truncation_tolerance = 1e-9;
    std::vector<int> k_list;
    std::vector<int> n_list;
    std::vector<int> N_list;
    int replications = 20;
    double epsilon = -1.0;  // negative: use the measured convolution-stage gap
    std::uint64_t seed = 1;
    std::string out_path;
    std::string out_format = "csv";

    std::vector<double> identity_deltas = {0.5};

    int mix_k = 16;
    int dictionary_points = 0;  // 0: 401 / 101 / 21 per axis for p = 1 / 2 / 3
    std::string greedy_objective = "l2";

    std::vector<int> fit_k_grid = {4, 8, 16, 32};
    int fit_restarts = 1;
    int fit_max_iters = 500;
    double fit_tol = 1e-8;
    std::optional<std::pair<double, double>> fit_mean_box;  // default: the target's support
    std::vector<std::string> schedules = {"sqrt"};
    int holdout_n = 8;
    int holdout_N = 2000;
    double concentration_t = 1.0;
    double universal_constant = 1.0;
    int covering_points = 33;

    int threads = 0;  // 0: hardware concurrency
};

ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config(const std::string& path);

/// One CSV row. Aggregates over replications carry replication = -1.
struct ReportRow {
    std::string study;
    std::string axis;
    double axis_value = 0.0;
    int replication = -1;
    std::uint64_t seed = 0;
    std::string metric;
    double value = 0.0;
};

struct SlopeFit {
    std::string name;
    bool defined = false;
    double slope = 0.0;
    double intercept = 0.0;
    double ci_halfwidth = 0.0;
    int points = 0;
};

struct Report {
    std::string study;
    std::vector<ReportRow> rows;
    std::vector<SlopeFit> fits;
    std::vector<BoundReport> bounds;
    std::vector<std::string> diagnostics;

    void add(std::string axis, double axis_value, int replication, std::uint64_t seed, std::string metric,
             double value);
    /// Rows of one metric along one axis, aggregate rows only, sorted by axis value.
    std::vector<std::pair<double, double>> series(const std::string& axis, const std::string& metric) const;
    bool all_dominated() const;
    /// Canonical order: study, axis, axis_value, replication, metric, seed, value.
    void sort_rows();
};

struct LogLogFit {
    double slope = 0.0;
    double intercept = 0.0;
    double ci_halfwidth = 0.0;  // twice the slope's standard error; NaN with two points
};

/// Least squares on (log x, log y).
LogLogFit fit_loglog_slope(const std::vector<std::pair<double, double>>& points);

/// Slope entry for the report; undefined with fewer than four points.
SlopeFit make_slope_fit(std::string name, const std::vector<std::pair<double, double>>& points);

Report run_check_identity(const ExperimentConfig& config);
Report run_conv_rate(const ExperimentConfig& config);
Report run_mix_rate(const ExperimentConfig& config);
Report run_mle_risk(const ExperimentConfig& config);
Report run_bounds(const ExperimentConfig& config);
Report run_study(const ExperimentConfig& config);

void write_csv(const Report& report, std::ostream& out);
void write_json(const Report& report, std::ostream& out);
/// Empty path writes to stdout.
void emit_report(const Report& report, const std::string& path, const std::string& format);

/// Runs fn(i) for i < count on a small thread pool; results keep index order.
void parallel_for(int count, int threads, const std::function<void(int)>& fn);

/// Shortest round-trip decimal form of a double.
std::string format_number(double value);

} // namespace mixapprox
