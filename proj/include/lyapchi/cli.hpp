#ifndef LYAPCHI_CLI_HPP
#define LYAPCHI_CLI_HPP

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <ostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "lyapchi/circle_map.hpp"
#include "lyapchi/detail/parallel.hpp"
#include "lyapchi/errors.hpp"
#include "lyapchi/periodic_points.hpp"
#include "lyapchi/report.hpp"
#include "lyapchi/spectral.hpp"
#include "lyapchi/stats.hpp"

namespace lyapchi {

// Exit codes: 0 ok, 2 config error, 3 numeric failure, 4 degenerate map.
enum ExitCode : int {
    kExitOk = 0,
    kExitConfig = 2,
    kExitNumeric = 3,
    kExitDegenerate = 4,
};

struct RunConfig {
    std::string map_id;
    std::vector<int> periods;
    int modes = 64;
    double twist = 0.0;
    int bins = 100;
    unsigned threads = 0; // 0 = hardware default
    std::uint64_t cap = std::uint64_t{1} << 26;
    std::string out;      // empty = stdout
    std::string format;   // csv | json
    bool normalized = false;
};

namespace cli_detail {

using Json = nlohmann::ordered_json;

inline std::string fmt17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

// Fails fast (before any enumeration work) when a requested period would
// exceed the cap.
inline void check_cap(const CircleMap& map, const std::vector<int>& periods,
                      std::uint64_t cap) {
    for (int n : periods) {
        const std::uint64_t count = detail::fix_count(map.degree(), n);
        if (count > cap)
            throw CapExceeded("period " + std::to_string(n) + " needs " +
                              std::to_string(count) + " points, above the cap " +
                              std::to_string(cap) + "; raise --cap explicitly");
    }
}

inline void emit(const RunConfig& config, const std::string& text, std::ostream& fallback) {
    if (config.out.empty()) {
        fallback << text;
        return;
    }
    std::ofstream file(config.out, std::ios::binary);
    if (!file) throw InvalidParameter("cannot open output file '" + config.out + "'");
    file << text;
}

inline std::string records_csv(const std::vector<PeriodicPointRecord>& records) {
    std::string out = "branch,point,exponent,residual\n";
    char buf[160];
    for (const PeriodicPointRecord& rec : records) {
        std::snprintf(buf, sizeof buf, "%lld,%.17g,%.17g,%.17g\n",
                      static_cast<long long>(rec.branch), rec.point, rec.exponent,
                      rec.residual);
        out += buf;
    }
    return out;
}

inline Json records_json(const std::vector<PeriodicPointRecord>& records) {
    Json arr = Json::array();
    for (const PeriodicPointRecord& rec : records)
        arr.push_back(Json{{"branch", rec.branch},
                           {"point", rec.point},
                           {"exponent", rec.exponent},
                           {"residual", rec.residual}});
    return arr;
}

inline int cmd_enumerate(const RunConfig& config, std::ostream& out) {
    const CircleMap map = CircleMap::from_id(config.map_id);
    check_cap(map, config.periods, config.cap);
    const auto records = enumerate_fix(map, config.periods.front(), EnumerateOptions{config.cap});
    if (config.format == "json") {
        Json doc{{"map", map.id()},
                 {"period", config.periods.front()},
                 {"records", records_json(records)}};
        emit(config, doc.dump(2) + "\n", out);
    } else {
        emit(config, records_csv(records), out);
    }
    return kExitOk;
}

inline int cmd_spectrum(const RunConfig& config, std::ostream& out) {
    const CircleMap map = CircleMap::from_id(config.map_id);
    const SpectrumSummary summary = spectrum_summary(map, config.modes);
    std::vector<double> twists = {0.0};
    if (config.twist != 0.0) {
        twists.push_back(config.twist);
        twists.push_back(-config.twist);
    }
    Json kappas = Json::array();
    for (double t : twists) {
        const Complex kappa = twisted_eigenvalue(map, t, summary.chi_bar, summary.modes);
        kappas.push_back(Json{{"t", t}, {"re", kappa.real()}, {"im", kappa.imag()}});
    }
    Json doc{{"map", map.id()},
             {"chi_bar", summary.chi_bar},
             {"sigma_squared", summary.variance.sigma_squared},
             {"degenerate_variance", summary.variance.degenerate},
             {"truncation", summary.variance.truncation},
             {"tail_bound", summary.variance.tail_bound},
             {"modes", summary.modes},
             {"kappa", kappas}};
    emit(config, doc.dump(2) + "\n", out);
    return kExitOk;
}

inline Json report_json(const CltReport& report) {
    Json intervals = Json::array();
    for (const IntervalDiscrepancy& d : report.interval_discrepancies)
        intervals.push_back(Json{{"a", d.a},
                                 {"b", d.b},
                                 {"empirical", d.empirical},
                                 {"normal_mass", d.normal_mass},
                                 {"discrepancy", d.discrepancy}});
    Json chars = Json::array();
    for (const CharFnDiscrepancy& c : report.char_fn_discrepancies)
        chars.push_back(Json{{"lambda", c.lambda},
                             {"psi_re", c.psi.real()},
                             {"psi_im", c.psi.imag()},
                             {"discrepancy", c.discrepancy}});
    return Json{{"period", report.period},
                {"count", report.count},
                {"mean_error", report.mean_error},
                {"variance_error", report.variance_error},
                {"ks_distance", report.ks_distance},
                {"interval_discrepancies", intervals},
                {"char_fn_discrepancies", chars}};
}

inline int cmd_clt(const RunConfig& config, std::ostream& out) {
    const CircleMap map = CircleMap::from_id(config.map_id);
    check_cap(map, config.periods, config.cap);
    const SpectrumSummary summary = spectrum_summary(map, config.modes);
    if (summary.variance.degenerate)
        throw DegenerateSigma("asymptotic variance is degenerate for " + map.id());

    CltOptions opts;
    opts.modes = summary.modes;
    opts.cap = config.cap;
    Json reports = Json::array();
    std::vector<double> ns, ds;
    for (int n : config.periods) {
        const EmpiricalDistribution dist = exponent_multiset(map, n, EnumerateOptions{config.cap});
        const CltReport report =
            clt_report_from(dist, summary.chi_bar, summary.variance.sigma_squared, opts);
        reports.push_back(report_json(report));
        ns.push_back(n);
        ds.push_back(report.ks_distance);
    }
    Json doc{{"map", map.id()},
             {"modes", summary.modes},
             {"chi_bar", summary.chi_bar},
             {"sigma_squared", summary.variance.sigma_squared},
             {"sigma", std::sqrt(summary.variance.sigma_squared)},
             {"reports", reports}};
    if (ns.size() >= 2)
        doc["ks_loglog_slope"] = fit_loglog_slope(ns, ds);
    emit(config, doc.dump(2) + "\n", out);
    return kExitOk;
}

inline int cmd_histogram(const RunConfig& config, std::ostream& out) {
    const CircleMap map = CircleMap::from_id(config.map_id);
    check_cap(map, config.periods, config.cap);
    EmpiricalDistribution dist =
        exponent_multiset(map, config.periods.front(), EnumerateOptions{config.cap});
    if (config.normalized) {
        const SpectrumSummary summary = spectrum_summary(map, config.modes);
        if (summary.variance.degenerate)
            throw DegenerateSigma("asymptotic variance is degenerate for " + map.id());
        dist = normalize(dist, summary.chi_bar, std::sqrt(summary.variance.sigma_squared));
    }
    const Histogram hist = histogram(dist, config.bins);
    if (config.format == "json") {
        Json bins = Json::array();
        for (std::size_t i = 0; i < hist.counts.size(); ++i)
            bins.push_back(Json{{"bin_left", hist.bin_edges[i]},
                                {"bin_right", hist.bin_edges[i + 1]},
                                {"count", hist.counts[i]}});
        Json doc{{"map", map.id()}, {"period", config.periods.front()}, {"bins", bins}};
        emit(config, doc.dump(2) + "\n", out);
    } else {
        std::string text = "bin_left,bin_right,count\n";
        char buf[120];
        for (std::size_t i = 0; i < hist.counts.size(); ++i) {
            std::snprintf(buf, sizeof buf, "%.17g,%.17g,%llu\n", hist.bin_edges[i],
                          hist.bin_edges[i + 1],
                          static_cast<unsigned long long>(hist.counts[i]));
            text += buf;
        }
        emit(config, text, out);
    }
    return kExitOk;
}

} // namespace cli_detail

// Runs the command line given as argv-style arguments (program name not
// included). Output goes to `out` unless --out redirects it to a file;
// diagnostics go to `err`. Identical arguments produce byte-identical output
// regardless of --threads.
inline int run_cli(std::vector<std::string> args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Periodic Lyapunov exponent statistics for expanding circle maps"};
    app.require_subcommand(1);

    RunConfig config;

    auto add_common = [&](CLI::App* cmd, bool wants_format, const char* default_format) {
        cmd->add_option("--threads", config.threads,
                        "worker count (0 = hardware default)")
            ->envname("LYAPCHI_THREADS");
        cmd->add_option("--cap", config.cap, "enumeration cap on K^n - 1");
        cmd->add_option("--out", config.out, "write output to this file instead of stdout");
        if (wants_format)
            cmd->add_option("--format", config.format, "output format")
                ->check(CLI::IsMember({"csv", "json"}))
                ->default_val(default_format);
    };

    CLI::App* enumerate = app.add_subcommand("enumerate", "dump Fix(f^n) as CSV");
    enumerate->add_option("--map", config.map_id, "map id, e.g. trigdoubling:0.01")->required();
    enumerate->add_option("--period", config.periods, "period n")->required()->expected(1);
    add_common(enumerate, true, "csv");

    CLI::App* spectrum = app.add_subcommand("spectrum", "CLT parameters from the transfer operator");
    spectrum->add_option("--map", config.map_id, "map id")->required();
    spectrum->add_option("--modes", config.modes, "trigonometric modes N (doubled on demand)");
    spectrum->add_option("--twist", config.twist, "also report kappa(+-t) for this twist");
    add_common(spectrum, false, "json");

    CLI::App* clt = app.add_subcommand("clt", "CLT convergence study over several periods");
    clt->alias("clt-check");
    clt->add_option("--map", config.map_id, "map id")->required();
    clt->add_option("--periods", config.periods, "comma-separated periods")
        ->required()
        ->delimiter(',');
    clt->add_option("--modes", config.modes, "trigonometric modes N");
    add_common(clt, false, "json");

    CLI::App* hist = app.add_subcommand("histogram", "equal-width histogram of the exponents");
    hist->add_option("--map", config.map_id, "map id")->required();
    hist->add_option("--period", config.periods, "period n")->required()->expected(1);
    hist->add_option("--bins", config.bins, "bin count");
    hist->add_flag("--normalized", config.normalized,
                   "histogram of (chi - chi_bar) sqrt(n) / sigma instead of raw exponents");
    hist->add_option("--modes", config.modes, "trigonometric modes N (for --normalized)");
    add_common(hist, true, "csv");

    std::vector<const char*> argv;
    argv.push_back("lyapchi");
    for (const std::string& a : args) argv.push_back(a.c_str());

    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        err << "lyapchi: " << e.what() << "\n";
        return kExitConfig;
    }

    try {
        for (int n : config.periods)
            if (n < 1) throw InvalidParameter("periods must be >= 1");
        set_worker_count(config.threads);
        if (enumerate->parsed()) return cli_detail::cmd_enumerate(config, out);
        if (spectrum->parsed()) return cli_detail::cmd_spectrum(config, out);
        if (clt->parsed()) return cli_detail::cmd_clt(config, out);
        if (hist->parsed()) return cli_detail::cmd_histogram(config, out);
        err << "lyapchi: no subcommand\n";
        return kExitConfig;
    } catch (const InvalidParameter& e) {
        err << "lyapchi: config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const NotExpanding& e) {
        err << "lyapchi: config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const CapExceeded& e) {
        err << "lyapchi: config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const ConvergenceFailure& e) {
        err << "lyapchi: numeric failure: " << e.what() << "\n";
        return kExitNumeric;
    } catch (const ResolutionError& e) {
        err << "lyapchi: numeric failure: " << e.what() << "\n";
        return kExitNumeric;
    } catch (const DegenerateSigma& e) {
        err << "lyapchi: degenerate map: " << e.what() << "\n";
        return kExitDegenerate;
    } catch (const DegenerateRange& e) {
        err << "lyapchi: degenerate map: " << e.what() << "\n";
        return kExitDegenerate;
    } catch (const Error& e) {
        err << "lyapchi: " << e.what() << "\n";
        return kExitNumeric;
    } catch (const std::exception& e) {
        err << "lyapchi: internal error: " << e.what() << "\n";
        return 1;
    }
}

} // namespace lyapchi

#endif // LYAPCHI_CLI_HPP
