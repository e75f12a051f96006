#include "mixapprox/harness.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <exception>
#include <fstream>
#include <iostream>
#include <map>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>
#include <tuple>

#include <json.hpp>

#include "mixapprox/density_zoo.hpp"
#include "mixapprox/divergences.hpp"
#include "mixapprox/grid_engine.hpp"
#include "mixapprox/kernel_family.hpp"
#include "mixapprox/mixture_model.hpp"

namespace mixapprox {

// ---------------------------------------------------------------- config

namespace {

std::string trim(std::string_view s)
{
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) {
        return {};
    }
    const auto last = s.find_last_not_of(" \t\r");
    return std::string(s.substr(first, last - first + 1));
}

template <typename T>
T parse_number(const std::string& key, const std::string& text)
{
    T value{};
    const char* end = text.data() + text.size();
    const auto [ptr, ec] = std::from_chars(text.data(), end, value);
    if (ec != std::errc() || ptr != end) {
        throw ValidationError("config: key '" + key + "' expects a number, got '" + text + "'");
    }
    return value;
}

std::vector<std::string> split_list(const std::string& text)
{
    std::vector<std::string> items;
    std::stringstream in(text);
    std::string item;
    while (std::getline(in, item, ',')) {
        item = trim(item);
        if (!item.empty()) {
            items.push_back(item);
        }
    }
    return items;
}

template <typename T>
std::vector<T> parse_list(const std::string& key, const std::string& text)
{
    std::vector<T> out;
    for (const std::string& item : split_list(text)) {
        out.push_back(parse_number<T>(key, item));
    }
    if (out.empty()) {
        throw ValidationError("config: key '" + key + "' needs at least one value");
    }
    return out;
}

void require_positive(const std::vector<int>& values, const std::string& key)
{
    for (int v : values) {
        if (v < 1) {
            throw ValidationError("config: '" + key + "' entries must be positive");
        }
    }
}

const std::set<std::string>& study_names()
{
    static const std::set<std::string> names = {"conv-rate", "mix-rate", "mle-risk", "bounds",
                                                "check-identity"};
    return names;
}

} // namespace

ExperimentConfig parse_config(const std::string& text)
{
    ExperimentConfig c;
    std::stringstream in(text);
    std::string line;
    int number = 0;
    while (std::getline(in, line)) {
        ++number;
        const auto hash = line.find('#');
        if (hash != std::string::npos) {
            line.erase(hash);
        }
        line = trim(line);
        if (line.empty()) {
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw ValidationError("config line " + std::to_string(number) + ": expected key = value");
        }
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (value.empty()) {
            throw ValidationError("config: key '" + key + "' has no value");
        }

        if (key == "study") {
            c.study = value;
        } else if (key == "density.name") {
            c.density_name = value;
        } else if (key == "density.dim") {
            c.density_dim = parse_number<int>(key, value);
        } else if (key == "kernel.name") {
            c.kernel_name = value;
        } else if (key == "grid.points_per_axis") {
            c.grid_points = parse_number<int>(key, value);
        } else if (key == "grid.rule") {
            c.grid_rule = parse_rule(value);
        } else if (key == "grid.truncation_tolerance") {
            c.truncation_tolerance = parse_number<double>(key, value);
        } else if (key == "k.list") {
            c.k_list = parse_list<int>(key, value);
        } else if (key == "n.list" || key == "fit.n") {
            c.n_list = parse_list<int>(key, value);
        } else if (key == "N.list") {
            c.N_list = parse_list<int>(key, value);
        } else if (key == "replications") {
            c.replications = parse_number<int>(key, value);
        } else if (key == "epsilon") {
            c.epsilon = parse_number<double>(key, value);
        } else if (key == "seed") {
            c.seed = parse_number<std::uint64_t>(key, value);
        } else if (key == "out.path") {
            c.out_path = value;
        } else if (key == "out.format") {
            c.out_format = value;
        } else if (key == "identity.deltas") {
            c.identity_deltas = parse_list<double>(key, value);
        } else if (key == "mix.k") {
            c.mix_k = parse_number<int>(key, value);
        } else if (key == "mix.dictionary_points") {
            c.dictionary_points = parse_number<int>(key, value);
        } else if (key == "mix.objective") {
            c.greedy_objective = value;
        } else if (key == "fit.k_grid") {
            c.fit_k_grid = parse_list<int>(key, value);
        } else if (key == "fit.restarts") {
            c.fit_restarts = parse_number<int>(key, value);
        } else if (key == "fit.max_iters") {
            c.fit_max_iters = parse_number<int>(key, value);
        } else if (key == "fit.tol") {
            c.fit_tol = parse_number<double>(key, value);
        } else if (key == "fit.mean_box") {
            const auto box = parse_list<double>(key, value);
            if (box.size() != 2) {
                throw ValidationError("config: fit.mean_box expects 'lower, upper'");
            }
            c.fit_mean_box = std::make_pair(box[0], box[1]);
        } else if (key == "mle.schedules") {
            c.schedules = split_list(value);
        } else if (key == "mle.holdout_n") {
            c.holdout_n = parse_number<int>(key, value);
        } else if (key == "mle.holdout_N") {
            c.holdout_N = parse_number<int>(key, value);
        } else if (key == "bounds.t") {
            c.concentration_t = parse_number<double>(key, value);
        } else if (key == "bounds.universal_constant") {
            c.universal_constant = parse_number<double>(key, value);
        } else if (key == "bounds.covering_points") {
            c.covering_points = parse_number<int>(key, value);
        } else if (key == "threads") {
            c.threads = parse_number<int>(key, value);
        } else {
            throw ValidationError("config: unknown key '" + key + "'");
        }
    }

    if (!c.study.empty() && !study_names().count(c.study)) {
        throw ValidationError("config: unknown study '" + c.study + "'");
    }
    if (c.replications < 1) {
        throw ValidationError("config: replications must be at least 1");
    }
    if (c.out_format != "csv" && c.out_format != "json") {
        throw ValidationError("config: out.format must be csv or json");
    }
    for (const std::string& s : c.schedules) {
        if (s != "sqrt" && s != "sqrt_log") {
            throw ValidationError("config: schedules are 'sqrt' and 'sqrt_log'");
        }
    }
    require_positive(c.k_list, "k.list");
    require_positive(c.n_list, "n.list");
    require_positive(c.N_list, "N.list");
    require_positive(c.fit_k_grid, "fit.k_grid");
    if (c.fit_restarts < 1 || c.fit_max_iters < 1 || c.mix_k < 1 || c.holdout_n < 1 || c.holdout_N < 1) {
        throw ValidationError("config: counts must be positive");
    }
    return c;
}

ExperimentConfig load_config(const std::string& path)
{
    std::ifstream in(path);
    if (!in) {
        throw ValidationError("cannot read config file '" + path + "'");
    }
    std::stringstream buffer;
    buffer << in.rdbuf();
    return parse_config(buffer.str());
}

// ---------------------------------------------------------------- report

void Report::add(std::string axis, double axis_value, int replication, std::uint64_t seed, std::string metric,
                 double value)
{
    rows.push_back({study, std::move(axis), axis_value, replication, seed, std::move(metric), value});
}

std::vector<std::pair<double, double>> Report::series(const std::string& axis, const std::string& metric) const
{
    std::vector<std::pair<double, double>> out;
    for (const ReportRow& r : rows) {
        if (r.axis == axis && r.metric == metric && r.replication < 0) {
            out.emplace_back(r.axis_value, r.value);
        }
    }
    std::sort(out.begin(), out.end());
    return out;
}

bool Report::all_dominated() const
{
    return std::all_of(bounds.begin(), bounds.end(), [](const BoundReport& b) { return b.dominated; });
}

void Report::sort_rows()
{
    std::stable_sort(rows.begin(), rows.end(), [](const ReportRow& a, const ReportRow& b) {
        return std::tie(a.study, a.axis, a.axis_value, a.replication, a.metric, a.seed) <
               std::tie(b.study, b.axis, b.axis_value, b.replication, b.metric, b.seed);
    });
}

LogLogFit fit_loglog_slope(const std::vector<std::pair<double, double>>& points)
{
    if (points.size() < 2) {
        throw ValidationError("fit_loglog_slope: need at least two points");
    }
    const auto m = static_cast<Eigen::Index>(points.size());
    Vector lx(m), ly(m);
    for (Eigen::Index i = 0; i < m; ++i) {
        const auto [x, y] = points[static_cast<std::size_t>(i)];
        if (!(x > 0.0) || !(y > 0.0)) {
            throw ValidationError("fit_loglog_slope: coordinates must be positive");
        }
        lx[i] = std::log(x);
        ly[i] = std::log(y);
    }
    const double mx = lx.mean();
    const double my = ly.mean();
    const double sxx = (lx.array() - mx).square().sum();
    if (!(sxx > 0.0)) {
        throw ValidationError("fit_loglog_slope: abscissae must not all coincide");
    }
    LogLogFit fit;
    fit.slope = ((lx.array() - mx) * (ly.array() - my)).sum() / sxx;
    fit.intercept = my - fit.slope * mx;
    if (m > 2) {
        const double rss = (ly.array() - fit.intercept - fit.slope * lx.array()).square().sum();
        fit.ci_halfwidth = 2.0 * std::sqrt(rss / static_cast<double>(m - 2) / sxx);
    } else {
        fit.ci_halfwidth = std::numeric_limits<double>::quiet_NaN();
    }
    return fit;
}

SlopeFit make_slope_fit(std::string name, const std::vector<std::pair<double, double>>& points)
{
    SlopeFit s;
    s.name = std::move(name);
    s.points = static_cast<int>(points.size());
    const bool positive = std::all_of(points.begin(), points.end(),
                                      [](const auto& p) { return p.first > 0.0 && p.second > 0.0; });
    if (points.size() >= 4 && positive) {
        const LogLogFit fit = fit_loglog_slope(points);
        s.defined = true;
        s.slope = fit.slope;
        s.intercept = fit.intercept;
        s.ci_halfwidth = fit.ci_halfwidth;
    }
    return s;
}

std::string format_number(double value)
{
    if (std::isnan(value)) {
        return "nan";
    }
    if (std::isinf(value)) {
        return value > 0.0 ? "inf" : "-inf";
    }
    char buffer[64];
    const auto [ptr, ec] = std::to_chars(buffer, buffer + sizeof buffer, value);
    return std::string(buffer, ptr);
}

void write_csv(const Report& report, std::ostream& out)
{
    out << "study,axis,axis_value,replication,seed,metric,value\n";
    for (const ReportRow& r : report.rows) {
        out << r.study << ',' << r.axis << ',' << format_number(r.axis_value) << ',' << r.replication << ','
            << r.seed << ',' << r.metric << ',' << format_number(r.value) << '\n';
    }
}

namespace {

nlohmann::ordered_json number_or_null(double value)
{
    return std::isfinite(value) ? nlohmann::ordered_json(value) : nlohmann::ordered_json(nullptr);
}

} // namespace

void write_json(const Report& report, std::ostream& out)
{
    using nlohmann::ordered_json;
    ordered_json doc;
    doc["study"] = report.study;
    ordered_json rows = ordered_json::array();
    for (const ReportRow& r : report.rows) {
        ordered_json row;
        row["study"] = r.study;
        row["axis"] = r.axis;
        row["axis_value"] = number_or_null(r.axis_value);
        row["replication"] = r.replication;
        row["seed"] = r.seed;
        row["metric"] = r.metric;
        row["value"] = number_or_null(r.value);
        rows.push_back(std::move(row));
    }
    doc["rows"] = std::move(rows);
    ordered_json fits = ordered_json::array();
    for (const SlopeFit& s : report.fits) {
        ordered_json fit;
        fit["name"] = s.name;
        fit["points"] = s.points;
        fit["slope"] = s.defined ? number_or_null(s.slope) : ordered_json(nullptr);
        fit["intercept"] = s.defined ? number_or_null(s.intercept) : ordered_json(nullptr);
        fit["slope_ci_halfwidth"] = s.defined ? number_or_null(s.ci_halfwidth) : ordered_json(nullptr);
        fits.push_back(std::move(fit));
    }
    doc["fits"] = std::move(fits);
    ordered_json bounds = ordered_json::array();
    for (const BoundReport& b : report.bounds) {
        ordered_json entry;
        entry["bound"] = b.bound_name;
        entry["n"] = number_or_null(b.n);
        entry["N"] = number_or_null(b.N);
        entry["epsilon"] = number_or_null(b.epsilon);
        entry["k"] = b.k;
        entry["rhs"] = number_or_null(b.rhs);
        entry["measured"] = number_or_null(b.measured);
        entry["dominated"] = b.dominated;
        bounds.push_back(std::move(entry));
    }
    doc["bounds"] = std::move(bounds);
    doc["diagnostics"] = report.diagnostics;
    out << doc.dump(2) << '\n';
}

void emit_report(const Report& report, const std::string& path, const std::string& format)
{
    if (format != "csv" && format != "json") {
        throw ValidationError("emit_report: format must be csv or json");
    }
    auto write = [&](std::ostream& out) {
        if (format == "csv") {
            write_csv(report, out);
        } else {
            write_json(report, out);
        }
    };
    if (path.empty()) {
        write(std::cout);
        std::cout.flush();
        return;
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw std::runtime_error("emit_report: cannot open '" + path + "' for writing");
    }
    write(out);
    if (!out) {
        throw std::runtime_error("emit_report: write to '" + path + "' failed");
    }
}

void parallel_for(int count, int threads, const std::function<void(int)>& fn)
{
    if (threads <= 0) {
        threads = static_cast<int>(std::max(1U, std::thread::hardware_concurrency()));
    }
    threads = std::max(1, std::min(threads, count));
    if (threads == 1) {
        for (int i = 0; i < count; ++i) {
            fn(i);
        }
        return;
    }
    std::atomic<int> next{0};
    std::vector<std::exception_ptr> errors(static_cast<std::size_t>(count));
    std::vector<std::thread> pool;
    for (int t = 0; t < threads; ++t) {
        pool.emplace_back([&] {
            for (int i = next++; i < count; i = next++) {
                try {
                    fn(i);
                } catch (...) {
                    errors[i] = std::current_exception();
                }
            }
        });
    }
    for (std::thread& th : pool) {
        th.join();
    }
    for (const auto& e : errors) {
        if (e) {
            std::rethrow_exception(e);
        }
    }
}

// ---------------------------------------------------------------- studies

namespace {

TensorGrid target_grid(const ExperimentConfig& c, const TargetDensity& f)
{
    const int points = c.grid_points > 0 ? c.grid_points : default_points_per_axis(f.dim);
    return TensorGrid(f.support, points, c.grid_rule);
}

void require_list(const std::vector<int>& list, const char* key, const std::string& study)
{
    if (list.empty()) {
        throw ValidationError(study + " needs a nonempty '" + key + "'");
    }
}

/// The support of a zoo target as a mean box; zoo supports are cubes.
MeanBox support_box(const TargetDensity& f)
{
    for (int a = 1; a < f.dim; ++a) {
        if (f.support.lower(a) != f.support.lower(0) || f.support.upper(a) != f.support.upper(0)) {
            throw ValidationError("mean box needs a cubic support");
        }
    }
    return MeanBox(f.support.lower(0), f.support.upper(0), f.dim);
}

int default_dictionary_points(int dim)
{
    switch (dim) {
    case 1:
        return 401;
    case 2:
        return 101;
    default:
        return 21;
    }
}

double interior_sup(const GridFunction& err, const SupportBox& box)
{
    double sup = 0.0;
    for (Eigen::Index i = 0; i < err.grid.size(); ++i) {
        if (box.contains(err.grid.node(i), 1e-12)) {
            sup = std::max(sup, std::abs(err.values[i]));
        }
    }
    return sup;
}

SupportBox middle_half(const SupportBox& box)
{
    const Vector quarter = 0.25 * (box.upper() - box.lower());
    return SupportBox(box.lower() + quarter, box.upper() - quarter);
}

} // namespace

Report run_check_identity(const ExperimentConfig& c)
{
    require_list(c.k_list, "k.list", "check-identity");
    Report report;
    report.study = "check-identity";
    const ProductKernel kernel = make_product_kernel(c.kernel_name, c.density_dim);
    std::vector<int> ks = c.k_list;
    std::sort(ks.begin(), ks.end());
    ks.erase(std::unique(ks.begin(), ks.end()), ks.end());
    const IdentityReport cert = certify_approximate_identity(kernel, c.identity_deltas, ks);
    for (const IdentityScaleRow& row : cert.scales) {
        report.add("k", row.k, -1, c.seed, "mass", row.mass);
        report.add("k", row.k, -1, c.seed, "min_value", row.min_value);
        report.add("k", row.k, -1, c.seed, "nonnegative", row.nonnegative);
        report.add("k", row.k, -1, c.seed, "unit_mass", row.unit_mass);
    }
    for (const IdentityRadiusRow& row : cert.radii) {
        const std::string tag = "outside_mass@" + format_number(row.delta);
        for (std::size_t i = 0; i < ks.size(); ++i) {
            report.add("k", ks[i], -1, c.seed, tag, row.outside[i]);
        }
        report.add("delta", row.delta, -1, c.seed, "nonincreasing", row.nonincreasing);
        report.add("delta", row.delta, -1, c.seed, "strictly_decreasing", row.strictly_decreasing);
        report.add("delta", row.delta, -1, c.seed, "final_below_0.01", row.final_below);
    }
    report.add("a", 1.0, -1, c.seed, "moment", check_moment_condition(kernel, 1.0));
    report.add("summary", 0.0, -1, c.seed, "passed", cert.passed);
    if (!cert.passed) {
        report.diagnostics.push_back("approximate-identity certification failed");
    }
    return report;
}

Report run_conv_rate(const ExperimentConfig& c)
{
    require_list(c.k_list, "k.list", "conv-rate");
    Report report;
    report.study = "conv-rate";
    const TargetDensity f = make_target(c.density_name, c.density_dim);
    const ProductKernel kernel = make_product_kernel(c.kernel_name, c.density_dim);
    if (std::isinf(check_moment_condition(kernel, f.lipschitz_exponent))) {
        throw ValidationError("kernel fails the moment condition: int ||x||_1^a alpha(x) dx must be "
                              "finite for the Lipschitz convergence rate");
    }
    const TensorGrid grid = target_grid(c, f);
    const GridFunction sampled = GridFunction::sample(grid, f.evaluator);
    const SupportBox interior = middle_half(f.support);

    std::vector<int> ks = c.k_list;
    std::sort(ks.begin(), ks.end());
    ks.erase(std::unique(ks.begin(), ks.end()), ks.end());
    for (int k : ks) {
        const Dilation alpha(kernel, k);
        const TensorGrid out = default_output_grid(grid, alpha, c.truncation_tolerance);
        const GridFunction smooth = convolve(sampled, alpha, out);
        const GridFunction extended = zero_extend(f, out.box(), grid);
        if (!extended.grid.same_layout(out, 1e-9)) {
            throw ValidationError("conv-rate: zero extension and output grid disagree");
        }
        const GridFunction err(out, smooth.values - extended.values);
        report.add("k", k, -1, c.seed, "linf", lq_norm(err, kInfinity));
        report.add("k", k, -1, c.seed, "linf_support", interior_sup(err, f.support));
        report.add("k", k, -1, c.seed, "linf_interior", interior_sup(err, interior));
        report.add("k", k, -1, c.seed, "l1", lq_norm(err, 1.0));
        report.add("k", k, -1, c.seed, "l2", lq_norm(err, 2.0));
        report.add("k", k, -1, c.seed, "mass", quadrature_integrate(smooth));
    }
    for (const char* metric : {"linf", "linf_support", "linf_interior", "l1", "l2"}) {
        report.fits.push_back(make_slope_fit(std::string(metric) + "_vs_k", report.series("k", metric)));
    }
    return report;
}

Report run_mix_rate(const ExperimentConfig& c)
{
    require_list(c.n_list, "n.list", "mix-rate");
    Report report;
    report.study = "mix-rate";
    const TargetDensity f = make_target(c.density_name, c.density_dim);
    const ProductKernel kernel = make_product_kernel(c.kernel_name, c.density_dim);
    const int k = c.mix_k;
    const TensorGrid grid = target_grid(c, f);
    const GridFunction target = GridFunction::sample(grid, f.evaluator);

    // Stage 1: the smoothed target on K.
    const GridFunction smooth = convolve(target, Dilation(kernel, k), grid);
    const double kl_smooth = kl_divergence(target, smooth);
    const double beta = f.beta_lower;
    const double epsilon = c.epsilon >= 0.0 ? c.epsilon : beta * kl_smooth;
    report.add("constant", 0.0, -1, c.seed, "kl_target_smooth", kl_smooth);
    report.add("constant", 0.0, -1, c.seed, "epsilon_hat", epsilon);

    // Stage 2: greedy hull approximation of the smoothed target.
    const MeanBox box = support_box(f);
    const int points = c.dictionary_points > 0 ? c.dictionary_points : default_dictionary_points(f.dim);
    const Dictionary dictionary = Dictionary::lattice(kernel, k, box, points);
    const int n_max = *std::max_element(c.n_list.begin(), c.n_list.end());
    const GreedyResult greedy = greedy_fit(smooth, dictionary, n_max, parse_objective(c.greedy_objective));

    std::vector<double> gap(n_max), kl_bar(n_max), kl_f(n_max), l2_f(n_max), floor(n_max);
    for (int n = 1; n <= n_max; ++n) {
        const GridFunction fn = greedy.iterates[n - 1].on_grid(grid);
        const double d = lq_norm(GridFunction(grid, smooth.values - fn.values), 2.0);
        const double e = lq_norm(GridFunction(grid, target.values - fn.values), 2.0);
        gap[n - 1] = d * d;
        l2_f[n - 1] = e * e;
        kl_bar[n - 1] = kl_divergence(smooth, fn);
        kl_f[n - 1] = kl_divergence(target, fn);
        floor[n - 1] = fn.values.minCoeff();
    }
    std::set<int> listed(c.n_list.begin(), c.n_list.end());
    for (int n : listed) {
        report.add("n", n, -1, c.seed, "l2sq_smooth", gap[n - 1]);
        report.add("n", n, -1, c.seed, "kl_smooth", kl_bar[n - 1]);
        report.add("n", n, -1, c.seed, "kl", kl_f[n - 1]);
        report.add("n", n, -1, c.seed, "l2sq", l2_f[n - 1]);
        report.add("n", n, -1, c.seed, "objective", greedy.objective[n - 1]);
    }
    report.fits.push_back(make_slope_fit("l2sq_smooth_vs_n", report.series("n", "l2sq_smooth")));

    double c_hat = 0.0;
    for (int n = 1; n <= n_max; ++n) {
        c_hat = std::max(c_hat, n * gap[n - 1]);
    }
    report.add("constant", 0.0, -1, c.seed, "C_hat", c_hat);
    if (n_max >= 4) {
        double worst = 0.0;
        for (int n = 4; n <= n_max; ++n) {
            worst = std::max(worst, n * gap[n - 1]);
        }
        report.add("constant", 0.0, -1, c.seed, "hull_rate_ratio", worst / (4.0 * gap[3]));
    }

    if (beta > 0.0) {
        for (int n = 1; n <= n_max; ++n) {
            // Both densities must be bounded below; use the smaller floor.
            const double beta_n = std::min(beta, floor[n - 1]);
            if (!(beta_n > 0.0)) {
                report.diagnostics.push_back("hull_kl skipped at n=" + std::to_string(n) +
                                             ": iterate vanishes on the support");
                continue;
            }
            report.bounds.push_back(make_bound_report("hull_kl", hull_kl_rhs(epsilon, beta_n, c_hat, n),
                                                      kl_f[n - 1], n, 0.0, epsilon, k));
        }
    } else {
        report.diagnostics.push_back("hull_kl skipped: target is not bounded below on its support");
    }

    const ProbeSup A = compute_A_logratio(kernel, k, box, f.support);
    if (A.infinite) {
        report.diagnostics.push_back("log-ratio bounds skipped: A is infinite for kernel " + kernel.name());
        return report;
    }
    if (A.flagged) {
        report.diagnostics.push_back("A probe levels disagree by more than 1%");
    }
    const double gamma = compute_gamma(A.value);
    const MixingApproximant mixing = make_mixing_approximant(f, kernel, k, grid);
    const double c_ratio = compute_C_ratio(mixing, grid);
    const double c_weighted = compute_C_weighted(mixing, f, grid);
    report.add("constant", 0.0, -1, c.seed, "A", A.value);
    report.add("constant", 0.0, -1, c.seed, "gamma", gamma);
    report.add("constant", 0.0, -1, c.seed, "C_ratio", c_ratio);
    report.add("constant", 0.0, -1, c.seed, "C_weighted", c_weighted);
    for (int n = 1; n <= n_max; ++n) {
        report.bounds.push_back(
            make_bound_report("mixing_ratio", c_ratio * gamma / n, kl_bar[n - 1], n, 0.0, epsilon, k));
        report.bounds.push_back(make_bound_report("mixing_weighted", kl_smooth + c_weighted * gamma / n,
                                                  kl_f[n - 1], n, 0.0, epsilon, k));
    }
    return report;
}

namespace {

struct RiskCell {
    int n = 0;
    int N = 0;
};

struct RiskOutcome {
    double kl = 0.0;
    double loglik = 0.0;
    int k = 0;
    int warnings = 0;
    bool failed = false;
    std::uint64_t seed = 0;
};

int schedule_n(const std::string& schedule, int N)
{
    const double value = schedule == "sqrt" ? std::sqrt(static_cast<double>(N))
                                            : std::sqrt(N / std::log(static_cast<double>(N)));
    return std::max(1, static_cast<int>(std::ceil(value - 1e-12)));
}

/// Nonnegative least squares for y ~ a x1 + b x2 by enumerating the active sets.
std::pair<double, double> nnls2(const std::vector<double>& x1, const std::vector<double>& x2,
                                const std::vector<double>& y)
{
    auto sse = [&](double a, double b) {
        double s = 0.0;
        for (std::size_t i = 0; i < y.size(); ++i) {
            const double r = y[i] - a * x1[i] - b * x2[i];
            s += r * r;
        }
        return s;
    };
    auto dot = [](const std::vector<double>& u, const std::vector<double>& v) {
        double s = 0.0;
        for (std::size_t i = 0; i < u.size(); ++i) {
            s += u[i] * v[i];
        }
        return s;
    };
    std::vector<std::pair<double, double>> candidates = {{0.0, 0.0}};
    const double s11 = dot(x1, x1), s22 = dot(x2, x2), s12 = dot(x1, x2);
    const double y1 = dot(x1, y), y2 = dot(x2, y);
    if (s11 > 0.0) {
        candidates.emplace_back(std::max(0.0, y1 / s11), 0.0);
    }
    if (s22 > 0.0) {
        candidates.emplace_back(0.0, std::max(0.0, y2 / s22));
    }
    const double det = s11 * s22 - s12 * s12;
    if (det > 1e-14 * s11 * s22) {
        const double a = (y1 * s22 - y2 * s12) / det;
        const double b = (y2 * s11 - y1 * s12) / det;
        if (a >= 0.0 && b >= 0.0) {
            candidates.emplace_back(a, b);
        }
    }
    auto best = candidates.front();
    for (const auto& cand : candidates) {
        if (sse(cand.first, cand.second) < sse(best.first, best.second)) {
            best = cand;
        }
    }
    return best;
}

} // namespace

Report run_mle_risk(const ExperimentConfig& c)
{
    require_list(c.N_list, "N.list", "mle-risk");
    Report report;
    report.study = "mle-risk";
    const TargetDensity f = make_target(c.density_name, c.density_dim);
    if (!f.in_f5()) {
        throw ValidationError("mle-risk needs a target bounded below on its support");
    }
    const ProductKernel kernel = make_product_kernel(c.kernel_name, c.density_dim);
    if (kernel.marginal().compact()) {
        throw ValidationError("mle-risk needs a gaussian or laplace kernel");
    }
    const MeanBox box = c.fit_mean_box ? MeanBox(c.fit_mean_box->first, c.fit_mean_box->second, f.dim)
                                       : support_box(f);
    const TensorGrid grid = target_grid(c, f);
    const GridFunction target = GridFunction::sample(grid, f.evaluator);
    EmOptions options;
    options.max_iters = c.fit_max_iters;
    options.tol = c.fit_tol;

    // Cells per axis; identical (n, N) pairs share their fits.
    std::vector<std::tuple<std::string, double, RiskCell>> listed;
    for (const std::string& s : c.schedules) {
        const std::string axis = s == "sqrt" ? "N" : "N_sqrt_log";
        for (int N : c.N_list) {
            listed.emplace_back(axis, N, RiskCell{schedule_n(s, N), N});
        }
    }
    const int N_max = *std::max_element(c.N_list.begin(), c.N_list.end());
    for (int n : c.n_list) {
        listed.emplace_back("n", n, RiskCell{n, N_max});
    }
    const RiskCell holdout{c.holdout_n, c.holdout_N};
    listed.emplace_back("holdout", 0.0, holdout);

    std::map<std::pair<int, int>, int> index;
    std::vector<RiskCell> unique;
    for (const auto& entry : listed) {
        const RiskCell& cell = std::get<2>(entry);
        if (index.emplace(std::make_pair(cell.n, cell.N), static_cast<int>(unique.size())).second) {
            unique.push_back(cell);
        }
    }
    const int reps = c.replications;
    std::vector<RiskOutcome> outcomes(unique.size() * static_cast<std::size_t>(reps));
    parallel_for(static_cast<int>(outcomes.size()), c.threads, [&](int task) {
        const RiskCell& cell = unique[task / reps];
        const int r = task % reps;
        // Samples depend on (seed, N, r) only, so cells at one N share their data.
        const std::uint64_t data_seed = derive_seed(derive_seed(c.seed, cell.N), r);
        RiskOutcome& out = outcomes[task];
        out.seed = data_seed;
        for (int attempt = 0; attempt < 2; ++attempt) {
            Rng rng(attempt == 0 ? data_seed : derive_seed(data_seed, 0x5eedULL));
            const Samples xs = f.sample(rng, cell.N);
            const MleResult fit = mle_fit(xs, std::min(cell.n, cell.N), c.fit_k_grid, kernel, box,
                                          c.fit_restarts, derive_seed(data_seed, cell.n), options);
            out.loglik = fit.best.log_likelihood();
            if (!std::isfinite(out.loglik)) {
                continue;
            }
            const FiniteMixture mix(kernel, fit.best.params);
            out.kl = kl_divergence(target, mix.log_on_grid(grid));
            out.k = fit.k;
            out.warnings = static_cast<int>(fit.best.warnings.size());
            out.failed = false;
            return;
        }
        out.failed = true;
    });

    struct Summary {
        double mean = 0.0, se = 0.0;
        int failures = 0;
    };
    std::vector<Summary> summary(unique.size());
    for (std::size_t u = 0; u < unique.size(); ++u) {
        std::vector<double> kls;
        for (int r = 0; r < reps; ++r) {
            const RiskOutcome& o = outcomes[u * reps + r];
            if (o.failed) {
                ++summary[u].failures;
            } else {
                kls.push_back(o.kl);
            }
        }
        if (!kls.empty()) {
            const Eigen::Map<const Vector> v(kls.data(), static_cast<Eigen::Index>(kls.size()));
            summary[u].mean = v.mean();
            summary[u].se = kls.size() > 1 ? std::sqrt((v.array() - v.mean()).square().sum() /
                                                       (kls.size() - 1.0) / kls.size())
                                           : 0.0;
        }
    }
    for (const auto& [axis, value, cell] : listed) {
        const int u = index.at({cell.n, cell.N});
        for (int r = 0; r < reps; ++r) {
            const RiskOutcome& o = outcomes[u * reps + r];
            if (o.failed) {
                report.add(axis, value, r, o.seed, "failure", 1.0);
                continue;
            }
            report.add(axis, value, r, o.seed, "kl", o.kl);
            report.add(axis, value, r, o.seed, "loglik", o.loglik);
            report.add(axis, value, r, o.seed, "k_selected", o.k);
            report.add(axis, value, r, o.seed, "em_warnings", o.warnings);
        }
        report.add(axis, value, -1, c.seed, "n", cell.n);
        report.add(axis, value, -1, c.seed, "N", cell.N);
        report.add(axis, value, -1, c.seed, "kl_mean", summary[u].mean);
        report.add(axis, value, -1, c.seed, "kl_se", summary[u].se);
        report.add(axis, value, -1, c.seed, "failures", summary[u].failures);
    }
    for (const std::string& s : c.schedules) {
        const std::string axis = s == "sqrt" ? "N" : "N_sqrt_log";
        report.fits.push_back(make_slope_fit("kl_mean_vs_" + axis, report.series(axis, "kl_mean")));
    }
    if (!c.n_list.empty()) {
        report.fits.push_back(make_slope_fit("kl_mean_vs_n", report.series("n", "kl_mean")));
    }

    // Certificates: fitted on training cells (every cell but the held-out one).
    const int k_top = *std::max_element(c.fit_k_grid.begin(), c.fit_k_grid.end());
    const double beta = f.beta_lower;
    double eps_over_beta = 0.0;
    if (c.epsilon >= 0.0) {
        eps_over_beta = c.epsilon / beta;
    } else {
        const GridFunction smooth = convolve(target, Dilation(kernel, k_top), grid);
        eps_over_beta = kl_divergence(target, smooth);
    }
    const double epsilon = eps_over_beta * beta;
    const int p = f.dim;
    const ProbeSup A = compute_A_logratio(kernel, k_top, box, f.support);
    const double gamma = compute_gamma(A.value);
    const double B = estimate_B_lipschitz(kernel, k_top, box, f.support).value;
    const double A_box = box.width();

    std::vector<double> x1, x2, xs_star, y_rate, y_star;
    std::vector<RiskCell> train;
    const int u_holdout = index.at({holdout.n, holdout.N});
    for (std::size_t u = 0; u < unique.size(); ++u) {
        if (static_cast<int>(u) == u_holdout) {
            continue;
        }
        const RiskCell& cell = unique[u];
        const double y = summary[u].mean + 2.0 * summary[u].se;
        train.push_back(cell);
        x1.push_back(1.0 / cell.n);
        x2.push_back(1.0 / std::sqrt(static_cast<double>(cell.N)));
        y_rate.push_back(y - eps_over_beta);
        const double third = gamma * (2.0 * cell.n * p / cell.N) * std::log(cell.N * A_box * B * std::exp(1.0));
        xs_star.push_back(gamma * gamma / cell.n);
        y_star.push_back(y - eps_over_beta - third);
    }
    auto [C1, C2] = nnls2(x1, x2, y_rate);
    double inflate = 1.0;
    for (std::size_t i = 0; i < train.size(); ++i) {
        const double pred = C1 * x1[i] + C2 * x2[i];
        if (y_rate[i] > 0.0) {
            if (pred > 0.0) {
                inflate = std::max(inflate, y_rate[i] / pred);
            } else {
                C2 = std::max(C2, y_rate[i] / x2[i]);
            }
        }
    }
    C1 *= inflate;
    C2 *= inflate;
    double c_sq = 0.0;
    {
        double num = 0.0, den = 0.0;
        for (std::size_t i = 0; i < train.size(); ++i) {
            num += xs_star[i] * y_star[i];
            den += xs_star[i] * xs_star[i];
        }
        c_sq = den > 0.0 ? std::max(0.0, num / den) : 0.0;
        for (std::size_t i = 0; i < train.size(); ++i) {
            c_sq = std::max(c_sq, y_star[i] / xs_star[i]);
        }
    }
    const double C_star = std::sqrt(c_sq);

    for (std::size_t i = 0; i < train.size(); ++i) {
        const RiskCell& cell = train[i];
        const double measured = summary[index.at({cell.n, cell.N})].mean;
        report.bounds.push_back(make_bound_report(
            "mle_rate_train", mle_rate_rhs(epsilon, beta, C1, C2, cell.n, cell.N), measured, cell.n, cell.N,
            epsilon, k_top));
        report.bounds.push_back(make_bound_report(
            "mle_expected_train", mle_kl_rhs(epsilon, beta, gamma, C_star, cell.n, cell.N, A_box, B, p),
            measured, cell.n, cell.N, epsilon, k_top));
    }
    const double held = summary[u_holdout].mean;
    report.bounds.push_back(make_bound_report("mle_rate_holdout",
                                              mle_rate_rhs(epsilon, beta, C1, C2, holdout.n, holdout.N), held,
                                              holdout.n, holdout.N, epsilon, k_top));
    report.bounds.push_back(make_bound_report(
        "mle_expected_holdout", mle_kl_rhs(epsilon, beta, gamma, C_star, holdout.n, holdout.N, A_box, B, p),
        held, holdout.n, holdout.N, epsilon, k_top));

    {
        Rng rng(derive_seed(derive_seed(c.seed, holdout.N), 0));
        const Samples xs = f.sample(rng, holdout.N);
        const Dictionary dictionary = Dictionary::lattice(kernel, k_top, box, c.covering_points);
        const CoveringProfile profile = covering_profile(dictionary, xs, f.beta_upper);
        const double dudley = dudley_integral(profile);
        for (std::size_t j = 0; j < profile.deltas.size(); ++j) {
            report.add("delta", profile.deltas[j], -1, c.seed, "covering_number",
                       static_cast<double>(profile.covering[j]));
        }
        report.add("constant", 0.0, -1, c.seed, "dudley_integral", dudley);
        report.bounds.push_back(make_bound_report(
            "concentration_holdout",
            concentration_rhs(epsilon, beta, f.beta_upper, holdout.n, holdout.N, dudley, c.concentration_t,
                              c.universal_constant),
            held, holdout.n, holdout.N, epsilon, k_top));
    }

    report.add("constant", 0.0, -1, c.seed, "epsilon_over_beta", eps_over_beta);
    report.add("constant", 0.0, -1, c.seed, "A", A.value);
    report.add("constant", 0.0, -1, c.seed, "gamma", gamma);
    report.add("constant", 0.0, -1, c.seed, "B", B);
    report.add("constant", 0.0, -1, c.seed, "A_box", A_box);
    report.add("constant", 0.0, -1, c.seed, "C1", C1);
    report.add("constant", 0.0, -1, c.seed, "C2", C2);
    report.add("constant", 0.0, -1, c.seed, "C_star", C_star);
    return report;
}

Report run_bounds(const ExperimentConfig& c)
{
    require_list(c.k_list, "k.list", "bounds");
    Report report;
    report.study = "bounds";
    const TargetDensity f = make_target(c.density_name, c.density_dim);
    const ProductKernel kernel = make_product_kernel(c.kernel_name, c.density_dim);
    const MeanBox box = c.fit_mean_box ? MeanBox(c.fit_mean_box->first, c.fit_mean_box->second, f.dim)
                                       : support_box(f);
    const TensorGrid grid = target_grid(c, f);
    report.add("constant", 0.0, -1, c.seed, "A_box", box.width());
    report.add("constant", 0.0, -1, c.seed, "beta_lower", f.beta_lower);
    report.add("constant", 0.0, -1, c.seed, "beta_upper", f.beta_upper);
    for (int k : c.k_list) {
        const ProbeSup A = compute_A_logratio(kernel, k, box, f.support);
        report.add("k", k, -1, c.seed, "A", A.value);
        report.add("k", k, -1, c.seed, "A_flagged", A.flagged);
        if (A.infinite) {
            report.diagnostics.push_back("A infinite at k=" + std::to_string(k) + " for kernel " + kernel.name());
            continue;
        }
        report.add("k", k, -1, c.seed, "gamma", compute_gamma(A.value));
        report.add("k", k, -1, c.seed, "B", estimate_B_lipschitz(kernel, k, box, f.support).value);
        const MixingApproximant mixing = make_mixing_approximant(f, kernel, k, grid);
        report.add("k", k, -1, c.seed, "C_ratio", compute_C_ratio(mixing, grid));
        report.add("k", k, -1, c.seed, "C_weighted", compute_C_weighted(mixing, f, grid));
    }
    return report;
}

Report run_study(const ExperimentConfig& config)
{
    Report report;
    if (config.study == "check-identity") {
        report = run_check_identity(config);
    } else if (config.study == "conv-rate") {
        report = run_conv_rate(config);
    } else if (config.study == "mix-rate") {
        report = run_mix_rate(config);
    } else if (config.study == "mle-risk") {
        report = run_mle_risk(config);
    } else if (config.study == "bounds") {
        report = run_bounds(config);
    } else {
        throw ValidationError("unknown study '" + config.study + "'");
    }
    report.sort_rows();
    return report;
}

} // namespace mixapprox
