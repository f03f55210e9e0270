#pragma once

#include <algorithm>
#include <chrono>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <json.hpp>

#include "cm_quartic.hpp"
#include "explicit_formula.hpp"
#include "lower_order.hpp"
#include "quadfield.hpp"
#include "sweep.hpp"
#include "testfn.hpp"

namespace lowlying::cli {

inline constexpr const char* tool_version = "0.1.0";

enum ExitCode : int { exit_ok = 0, exit_config = 1, exit_io = 2, exit_all_failed = 3, exit_invariant = 4 };

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct Window {
    u64 lo = 0;
    u64 hi = 0;
    bool operator==(const Window&) const = default;
};

inline Window parse_window(const std::string& s) {
    auto colon = s.find(':');
    if (colon == std::string::npos) throw ConfigError("window '" + s + "' must be lo:hi");
    try {
        std::size_t used = 0;
        Window w;
        w.lo = std::stoull(s.substr(0, colon), &used);
        if (used != colon) throw std::invalid_argument(s);
        std::string rest = s.substr(colon + 1);
        w.hi = std::stoull(rest, &used);
        if (used != rest.size()) throw std::invalid_argument(s);
        return w;
    } catch (const std::logic_error&) {
        throw ConfigError("window '" + s + "' must be lo:hi with non-negative integers");
    }
}

struct SweepConfig {
    double sigma = 0.9;
    u64 delta_min = 3;
    u64 delta_max = 0;  // 0: no range, windows only
    bool odd_only = false;
    std::vector<Window> windows;
    u64 cutoff_inert = 10000000;
    unsigned threads = 1;
    std::string output = "-";
    std::string format = "csv";
    u64 seed = 42;
    std::string phihat;  // optional knots file replacing the Fejer pair
};

inline void validate(const SweepConfig& c) {
    if (c.phihat.empty() && !(c.sigma > 0.0 && c.sigma < 1.0))
        throw ConfigError(fmt::format("sigma = {} is outside (0, 1); phihat must be supported inside (-1, 1)", c.sigma));
    if (c.delta_min < 3) throw ConfigError("delta-min must be >= 3");
    if (c.delta_max != 0 && c.delta_max < c.delta_min) throw ConfigError("delta-max is below delta-min");
    if (c.delta_max > max_delta) throw ConfigError("delta-max above supported maximum " + std::to_string(max_delta));
    for (std::size_t i = 0; i < c.windows.size(); ++i) {
        const Window& w = c.windows[i];
        if (w.lo < 3 || w.hi < w.lo) throw ConfigError(fmt::format("window {}:{} is empty or starts below 3", w.lo, w.hi));
        if (w.hi > max_delta) throw ConfigError(fmt::format("window {}:{} above supported maximum", w.lo, w.hi));
        if (i > 0 && c.windows[i - 1].hi >= w.lo) throw ConfigError("windows must be disjoint and sorted");
    }
    if (c.cutoff_inert < 2) throw ConfigError("cutoff-inert must be >= 2");
    if (c.threads < 1) throw ConfigError("threads must be >= 1");
    if (c.format != "csv" && c.format != "json") throw ConfigError("format must be csv or json");
}

inline TestFunction make_test_function(const SweepConfig& c) {
    if (c.phihat.empty()) return make_fejer(c.sigma, 1.0);
    try {
        return load_phihat_csv(c.phihat);
    } catch (const std::exception& e) {
        throw ConfigError(e.what());
    }
}

inline std::vector<u64> sweep_deltas(const SweepConfig& c) {
    std::vector<u64> out;
    auto take = [&](u64 lo, u64 hi) {
        for (u64 d : fundamental_in(lo, hi))
            if (!c.odd_only || has_odd_class_number(d)) out.push_back(d);
    };
    if (c.delta_max != 0) take(c.delta_min, c.delta_max);
    for (const Window& w : c.windows) take(w.lo, w.hi);
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

// summary groups: the windows, or the plain range when no windows are given
inline std::vector<Window> summary_groups(const SweepConfig& c) {
    if (!c.windows.empty()) return c.windows;
    if (c.delta_max != 0) return {{c.delta_min, c.delta_max}};
    return {};
}

inline std::string num(double v) { return fmt::format("{:.17g}", v); }

inline nlohmann::json config_json(const SweepConfig& c) {
    nlohmann::json w = nlohmann::json::array();
    for (const Window& x : c.windows) w.push_back(fmt::format("{}:{}", x.lo, x.hi));
    return {{"sigma", c.sigma},         {"delta_min", c.delta_min}, {"delta_max", c.delta_max},
            {"odd_only", c.odd_only},   {"windows", w},             {"cutoff_inert", c.cutoff_inert},
            {"threads", c.threads},     {"output", c.output},       {"format", c.format},
            {"seed", c.seed},           {"phihat", c.phihat}};
}

inline void write_text(const std::string& path, const std::string& text, std::ostream& out) {
    if (path.empty() || path == "-") {
        out << text;
        return;
    }
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw IoError("cannot open output file " + path);
    f << text;
    f.flush();
    if (!f) throw IoError("write failed for " + path);
}

struct WindowSummary {
    Window window;
    std::size_t count = 0;
    double median = 0.0;
    double extra = 0.0;
};

inline nlohmann::json summary_json(const std::vector<WindowSummary>& s, const char* median_key, const char* extra_key) {
    nlohmann::json a = nlohmann::json::array();
    for (const auto& w : s)
        a.push_back({{"lo", w.window.lo}, {"hi", w.window.hi}, {"count", w.count}, {median_key, w.median}, {extra_key, w.extra}});
    return a;
}

inline void write_manifest(const SweepConfig& c, const std::string& command, double seconds, std::size_t rows,
                           std::size_t failed, const nlohmann::json& windows, std::ostream& out) {
    if (c.output.empty() || c.output == "-") return;
    nlohmann::json m = {{"tool", "lowlying"},        {"version", tool_version}, {"command", command},
                        {"config", config_json(c)}, {"wall_time_seconds", seconds},
                        {"rows", rows},             {"failed_rows", failed},   {"windows", windows}};
    write_text(c.output + ".manifest.json", m.dump(2) + "\n", out);
}

template <typename Row>
std::vector<WindowSummary> summarize(const std::vector<Window>& groups, const std::vector<RowResult<Row>>& rows,
                                     double (*metric)(const Row&), double (*extra)(const Row&)) {
    std::vector<WindowSummary> out;
    for (const Window& w : groups) {
        std::vector<double> a;
        std::vector<double> b;
        for (const auto& r : rows) {
            if (!r.row || r.delta < w.lo || r.delta > w.hi) continue;
            a.push_back(metric(*r.row));
            b.push_back(extra(*r.row));
        }
        out.push_back({w, a.size(), median(a), median(b)});
    }
    return out;
}

template <typename Row>
std::size_t report_failures(const std::vector<RowResult<Row>>& rows, std::ostream& err) {
    std::size_t failed = 0;
    for (const auto& r : rows) {
        if (r.row) continue;
        ++failed;
        err << "warning: Delta=" << r.delta << " skipped: " << r.error << "\n";
    }
    return failed;
}

struct DensityRow {
    DensityBreakdown b;
    double brauer_siegel = 0.0;
};

inline int cmd_density_sweep(const SweepConfig& c, std::ostream& out, std::ostream& err) {
    const auto start = std::chrono::steady_clock::now();
    validate(c);
    const TestFunction t = make_test_function(c);
    const std::vector<u64> deltas = sweep_deltas(c);
    std::vector<RowResult<DensityRow>> rows;
    if (!deltas.empty()) {
        DensityEngine engine(t, deltas.back());
        rows = sweep_rows<DensityRow>(deltas, c.threads, [&](u64 d) {
            ClassGroup cg(d);
            return DensityRow{engine(cg), brauer_siegel_row(cg).ratio};
        });
    }
    const std::size_t failed = report_failures(rows, err);
    auto summary = summarize<DensityRow>(
        summary_groups(c), rows, [](const DensityRow& r) { return std::fabs(r.b.residual_vs_usp); },
        [](const DensityRow& r) { return r.brauer_siegel; });

    std::string text;
    if (c.format == "csv") {
        text = "delta,h,sigma,cosh_term,const_term,s1,s2,sinh_term,total_D,residual_vs_usp\n";
        for (const auto& r : rows) {
            if (!r.row) continue;
            const DensityBreakdown& b = r.row->b;
            text += fmt::format("{},{},{},{},{},{},{},{},{},{}\n", b.delta, b.h, num(b.sigma), num(b.cosh_term),
                                num(b.const_term), num(b.s1), num(b.s2), num(b.sinh_term), num(b.total_D),
                                num(b.residual_vs_usp));
        }
        if (!summary.empty()) {
            text += fmt::format("# usp_prediction={}\n", num(usp_prediction(t)));
            text += "# window_lo,window_hi,count,median_abs_residual_vs_usp,median_brauer_siegel_ratio\n";
            for (const auto& s : summary)
                text += fmt::format("# {},{},{},{},{}\n", s.window.lo, s.window.hi, s.count, num(s.median), num(s.extra));
        }
    } else {
        nlohmann::json j = {{"rows", nlohmann::json::array()}};
        for (const auto& r : rows) {
            if (!r.row) continue;
            const DensityBreakdown& b = r.row->b;
            j["rows"].push_back({{"delta", b.delta}, {"h", b.h}, {"sigma", b.sigma}, {"cosh_term", b.cosh_term},
                                 {"const_term", b.const_term}, {"s1", b.s1}, {"s2", b.s2}, {"sinh_term", b.sinh_term},
                                 {"total_D", b.total_D}, {"residual_vs_usp", b.residual_vs_usp},
                                 {"brauer_siegel_ratio", r.row->brauer_siegel}});
        }
        j["usp_prediction"] = usp_prediction(t);
        j["summary"] = summary_json(summary, "median_abs_residual_vs_usp", "median_brauer_siegel_ratio");
        text = j.dump(2) + "\n";
    }
    write_text(c.output, text, out);
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    write_manifest(c, "density-sweep", secs, rows.size(), failed,
                   summary_json(summary, "median_abs_residual_vs_usp", "median_brauer_siegel_ratio"), out);
    return !rows.empty() && failed == rows.size() ? exit_all_failed : exit_ok;
}

inline int cmd_tau_table(const SweepConfig& c, std::ostream& out, std::ostream& err) {
    const auto start = std::chrono::steady_clock::now();
    validate(c);
    if (!c.odd_only) err << "warning: tau-table without --odd-only mixes in even class numbers\n";
    const TestFunction t = make_test_function(c);
    const std::vector<u64> deltas = sweep_deltas(c);
    std::vector<RowResult<LowerOrderReport>> rows;
    if (!deltas.empty()) {
        LowerOrderOptions opt;
        opt.cutoff_inert = c.cutoff_inert;
        LowerOrderEngine engine(t, deltas.back(), opt);
        rows = sweep_rows<LowerOrderReport>(deltas, c.threads, [&](u64 d) { return engine(d); });
    }
    const std::size_t failed = report_failures(rows, err);
    auto summary = summarize<LowerOrderReport>(
        summary_groups(c), rows, [](const LowerOrderReport& r) { return std::fabs(r.residual.lhs - r.residual.rhs); },
        [](const LowerOrderReport& r) { return std::fabs(r.tau); });

    std::string text;
    if (c.format == "csv") {
        text = "delta,h,rho_K,gamma_K,inert_sum,inert_tail,tau,beta0_formula,beta0_numeric,euler_bound_holds,"
               "residual_lhs,residual_rhs,lprime_tail\n";
        for (const auto& r : rows) {
            if (!r.row) continue;
            const LowerOrderReport& x = *r.row;
            text += fmt::format("{},{},{},{},{},{},{},{},{},{},{},{},{}\n", x.delta, x.h, num(x.rho_K), num(x.gamma_K),
                                num(x.inert_sum), num(x.inert_tail), num(x.tau), num(x.beta0_formula),
                                num(x.beta0_numeric), x.euler.holds ? "true" : "false", num(x.residual.lhs),
                                num(x.residual.rhs), num(x.L1chi_prime_tail));
        }
        if (!summary.empty()) {
            text += "# window_lo,window_hi,count,median_abs_lhs_minus_rhs,median_abs_tau\n";
            for (const auto& s : summary)
                text += fmt::format("# {},{},{},{},{}\n", s.window.lo, s.window.hi, s.count, num(s.median), num(s.extra));
        }
    } else {
        nlohmann::json j = {{"rows", nlohmann::json::array()}};
        for (const auto& r : rows) {
            if (!r.row) continue;
            const LowerOrderReport& x = *r.row;
            j["rows"].push_back({{"delta", x.delta}, {"h", x.h}, {"rho_K", x.rho_K}, {"gamma_K", x.gamma_K},
                                 {"inert_sum", x.inert_sum}, {"inert_tail", x.inert_tail}, {"tau", x.tau},
                                 {"beta0_formula", x.beta0_formula}, {"beta0_numeric", x.beta0_numeric},
                                 {"euler_bound_holds", x.euler.holds}, {"residual_lhs", x.residual.lhs},
                                 {"residual_rhs", x.residual.rhs}, {"lprime_tail", x.L1chi_prime_tail}});
        }
        j["summary"] = summary_json(summary, "median_abs_lhs_minus_rhs", "median_abs_tau");
        text = j.dump(2) + "\n";
    }
    write_text(c.output, text, out);
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    write_manifest(c, "tau-table", secs, rows.size(), failed,
                   summary_json(summary, "median_abs_lhs_minus_rhs", "median_abs_tau"), out);
    return !rows.empty() && failed == rows.size() ? exit_all_failed : exit_ok;
}

inline int cmd_classgroup(u64 delta, std::ostream& out) {
    if (delta < 3 || delta > max_delta || !is_fundamental(delta))
        throw ConfigError(fmt::format("Delta = {} is not a fundamental discriminant (-Delta)", delta));
    ClassGroup cg(delta);
    GroupStructure gs(cg);
    nlohmann::json forms = nlohmann::json::array();
    for (const QuadForm& f : cg.forms())
        forms.push_back({static_cast<long long>(f.a), static_cast<long long>(f.b), static_cast<long long>(f.c)});
    nlohmann::json j = {{"delta", delta},
                        {"h", cg.h()},
                        {"w", roots_of_unity(delta)},
                        {"invariants", gs.invariants()},
                        {"forms", forms}};
    out << j.dump(2) << "\n";
    return exit_ok;
}

struct PanelEntry {
    std::size_t line = 0;
    CMQuartic field;
};

// "m a b [den]" per line, beta = (a + b sqrt m) / den; '#' starts a comment
inline std::vector<PanelEntry> load_panel(std::istream& in, const std::string& name) {
    std::vector<PanelEntry> out;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (auto h = line.find('#'); h != std::string::npos) line.erase(h);
        std::istringstream ss(line);
        std::vector<long long> v;
        long long x = 0;
        while (ss >> x) v.push_back(x);
        std::string junk;
        ss.clear();
        if (ss >> junk) throw ConfigError(fmt::format("{}:{}: unexpected token '{}'", name, lineno, junk));
        if (v.empty()) continue;
        if (v.size() != 3 && v.size() != 4) throw ConfigError(fmt::format("{}:{}: expected 'm a b [den]'", name, lineno));
        try {
            RealQuadBase base = make_base(v[0]);
            K0Element beta = K0Element::make(v[1], v[2], v.size() == 4 ? v[3] : 1);
            out.push_back({lineno, make_cm_quartic(base, beta)});
        } catch (const std::invalid_argument& e) {
            throw ConfigError(fmt::format("{}:{}: {}", name, lineno, e.what()));
        }
    }
    return out;
}

struct AppendixThresholds {
    double inverse_residual = 1e-9;
    double sqrtbeta_identity = 1e-10;
};

inline nlohmann::json appendix_json(const std::vector<PanelEntry>& panel, long long trials, u64 seed, unsigned threads,
                                    bool& all_pass) {
    const AppendixThresholds thr;
    auto reports = parallel_map<AppendixReport>(panel.size(), threads,
                                                [&](std::size_t i) { return appendix_report(panel[i].field, trials, seed); });
    std::map<i64, std::vector<double>> m_by_base;
    for (const auto& r : reports) m_by_base[r.m].push_back(r.M_unit);
    bool m_constant = true;
    for (const auto& [m, v] : m_by_base)
        for (double x : v) m_constant = m_constant && x == v.front();
    all_pass = m_constant;
    nlohmann::json fields = nlohmann::json::array();
    for (std::size_t i = 0; i < reports.size(); ++i) {
        const AppendixReport& r = reports[i];
        const RealQuadBase& base = panel[i].field.base;
        nlohmann::json checks = {{"totally_negative", r.totally_negative},
                                 {"discriminant_identity", r.discriminant_identity},
                                 {"inverse_residual", r.inverse_residual <= thr.inverse_residual},
                                 {"entry_bound", r.entry_bound_ok},
                                 {"sqrtbeta_identity", r.sqrtbeta_identity_err <= thr.sqrtbeta_identity},
                                 {"normform", r.normform_violations == 0}};
        bool pass = true;
        for (const auto& [k, v] : checks.items()) pass = pass && v.get<bool>();
        all_pass = all_pass && pass;
        fields.push_back({{"m", r.m},
                          {"beta", to_string(base, r.beta)},
                          {"ring_case", ring_case_name(r.ring)},
                          {"rel_disc_norm", static_cast<long long>(r.rel_disc_norm)},
                          {"delta", static_cast<long long>(r.delta)},
                          {"inverse_residual", r.inverse_residual},
                          {"lu_inverse_residual", r.lu_inverse_residual},
                          {"entry_bound_ok", r.entry_bound_ok},
                          {"gamma_max", r.gamma_max},
                          {"sqrtbeta_identity_err", r.sqrtbeta_identity_err},
                          {"sqrtbeta_norm_err", r.sqrtbeta_norm_err},
                          {"normform_violations", r.normform_violations},
                          {"M_unit", r.M_unit},
                          {"checks", checks},
                          {"pass", pass}});
    }
    return {{"trials", trials},
            {"seed", seed},
            {"fields", fields},
            {"m_unit_constant_per_base", m_constant},
            {"all_pass", all_pass}};
}

inline int cmd_appendix_checks(const std::string& panel_path, long long trials, const SweepConfig& c, std::ostream& out,
                               std::ostream& err) {
    const auto start = std::chrono::steady_clock::now();
    if (trials < 1) throw ConfigError("trials must be >= 1");
    if (c.threads < 1) throw ConfigError("threads must be >= 1");
    std::ifstream in(panel_path);
    if (!in) throw ConfigError("cannot open panel file " + panel_path);
    const std::vector<PanelEntry> panel = load_panel(in, panel_path);
    bool all_pass = true;
    nlohmann::json j = appendix_json(panel, trials, c.seed, c.threads, all_pass);
    write_text(c.output, j.dump(2) + "\n", out);
    if (!c.output.empty() && c.output != "-") {
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        nlohmann::json m = {{"tool", "lowlying"},   {"version", tool_version},     {"command", "appendix-checks"},
                            {"panel", panel_path},  {"config", config_json(c)},    {"trials", trials},
                            {"wall_time_seconds", secs}, {"panel_size", panel.size()}, {"all_pass", all_pass}};
        write_text(c.output + ".manifest.json", m.dump(2) + "\n", out);
    }
    if (!all_pass) {
        for (const auto& f : j["fields"])
            if (!f["pass"].get<bool>()) err << "appendix invariant failed for m=" << f["m"] << " beta=" << f["beta"].get<std::string>() << "\n";
        if (!j["m_unit_constant_per_base"].get<bool>()) err << "M_unit differs within a base field\n";
        return exit_invariant;
    }
    return exit_ok;
}

inline int run(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
    CLI::App app{"Low-lying zeros of class group L-functions: sweeps, lower-order terms and quartic checks", "lowlying"};
    app.set_version_flag("--version", tool_version);
    app.set_config("--config", "", "key = value settings file ('#' comments); flags override it");
    app.allow_config_extras(false);
    SweepConfig c;
    std::vector<std::string> windows;
    app.add_option("--sigma", c.sigma, "Fejer support half-width, 0 < sigma < 1")->capture_default_str();
    app.add_option("--delta-min", c.delta_min, "lower end of the Delta range")->capture_default_str();
    app.add_option("--delta-max", c.delta_max, "upper end of the Delta range (0: windows only)")->capture_default_str();
    app.add_flag("--odd-only", c.odd_only, "keep only odd class numbers");
    app.add_option("--window", windows, "Delta window lo:hi, repeatable");
    app.add_option("--cutoff-inert", c.cutoff_inert, "prime cutoff of the inert sum")->capture_default_str();
    app.add_option("--threads", c.threads, "worker threads")->capture_default_str();
    app.add_option("--output", c.output, "report path, '-' for stdout")->capture_default_str();
    app.add_option("--format", c.format, "csv or json")->capture_default_str();
    app.add_option("--seed", c.seed, "random seed")->capture_default_str();
    app.add_option("--phihat", c.phihat, "phihat knots CSV (y,value) replacing the Fejer pair");

    auto* density = app.add_subcommand("density-sweep", "one-level density breakdown per Delta");
    auto* tau = app.add_subcommand("tau-table", "first lower-order term per Delta");
    auto* appendix = app.add_subcommand("appendix-checks", "quartic CM panel checks (JSON)");
    auto* classgroup = app.add_subcommand("classgroup", "reduced forms and class number (JSON)");
    std::string panel;
    long long trials = 10000;
    appendix->add_option("--panel", panel, "panel file, lines 'm a b [den]'")->required();
    appendix->add_option("--trials", trials, "norm-form trials per field")->capture_default_str();
    u64 delta = 0;
    classgroup->add_option("delta", delta, "Delta, with -Delta a fundamental discriminant")->required();
    for (auto* s : {density, tau, appendix, classgroup}) s->fallthrough();
    app.require_subcommand(1, 1);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e, out, err) == 0 ? exit_ok : exit_config;
    }
    try {
        for (const auto& w : windows) c.windows.push_back(parse_window(w));
        if (*density) return cmd_density_sweep(c, out, err);
        if (*tau) return cmd_tau_table(c, out, err);
        if (*appendix) return cmd_appendix_checks(panel, trials, c, out, err);
        return cmd_classgroup(delta, out);
    } catch (const ConfigError& e) {
        err << "error: " << e.what() << "\n";
        return exit_config;
    } catch (const IoError& e) {
        err << "error: " << e.what() << "\n";
        return exit_io;
    }
}

inline int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    std::vector<const char*> argv{"lowlying"};
    for (const auto& a : args) argv.push_back(a.c_str());
    return run(static_cast<int>(argv.size()), argv.data(), out, err);
}

}  // namespace lowlying::cli
