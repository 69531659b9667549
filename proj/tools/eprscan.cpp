#include "epr/analysis.hpp"
#include "epr/coincidence.hpp"
#include "epr/config.hpp"
#include "epr/dataset_io.hpp"
#include "epr/errors.hpp"
#include "epr/schmidt.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <string>

namespace {

using nlohmann::json;

constexpr int kExitAnalysis = 1;
constexpr int kExitUsage = 2;

epr::RunConfig load_config(const std::string& path_flag) {
    std::string path = path_flag;
    if (path.empty()) {
        if (const char* env = std::getenv("EPRSCAN_CONFIG")) path = env;
    }
    if (path.empty()) return epr::RunConfig::defaults();
    return epr::RunConfig::load(path);
}

epr::PlaneMode parse_mode(const std::string& mode) {
    if (mode == "nf" || mode == "near" || mode == "near_field")
        return epr::PlaneMode::NearField;
    if (mode == "ff" || mode == "far" || mode == "far_field")
        return epr::PlaneMode::FarField;
    throw epr::input_error("mode must be nf or ff, got '" + mode + "'");
}

int cmd_simulate(const std::string& config_path, const std::string& mode_str,
                 std::int64_t seed_flag, const std::string& out,
                 int threads) {
    epr::RunConfig cfg = load_config(config_path);
    const epr::PlaneMode mode = parse_mode(mode_str);
    cfg.lens.mode = mode;
    if (seed_flag >= 0) cfg.seed = static_cast<std::uint64_t>(seed_flag);
    std::string out_path = out.empty() ? cfg.out_path : out;
    if (out_path.empty()) throw epr::input_error("no output path given");

    const epr::ScanDataset ds = epr::simulate_scan(
        cfg.source, cfg.lens, cfg.grid, cfg.noise, cfg.seed, threads);
    epr::write_dataset(ds, out_path);

    std::int64_t tot_s1 = 0, tot_s2 = 0, tot_cc = 0;
    std::int64_t max_s1 = 0, max_s2 = 0, max_cc = 0;
    for (const auto& r : ds.records) {
        tot_s1 += r.s1;
        tot_s2 += r.s2;
        tot_cc += r.cc;
        max_s1 = std::max(max_s1, r.s1);
        max_s2 = std::max(max_s2, r.s2);
        max_cc = std::max(max_cc, r.cc);
    }
    const double dwell = cfg.noise.dwell_s;
    std::printf("wrote %zu points to %s (+ sidecar)\n", ds.records.size(),
                out_path.c_str());
    std::printf("peak rates: s1 %.3g Hz, s2 %.3g Hz, cc %.3g Hz\n",
                max_s1 / dwell, max_s2 / dwell, max_cc / dwell);
    std::printf("totals:     s1 %lld, s2 %lld, cc %lld\n",
                static_cast<long long>(tot_s1), static_cast<long long>(tot_s2),
                static_cast<long long>(tot_cc));
    return 0;
}

json report_to_json(const epr::EprReport& rep) {
    json rows = json::array();
    for (const auto& row : rep.rows) {
        const char axis = row.axis == epr::Axis::X ? 'x' : 'y';
        const bool d12 = row.dir == epr::Direction::Infer1From2;
        rows.push_back(
            {{"axis", std::string(1, axis)},
             {"direction", d12 ? "1|2" : "2|1"},
             {"position_variance_mm2", row.position.value},
             {"position_err_mm2", row.position.err},
             {"position_slices", row.position.n_slices},
             {"momentum_variance_per_mm2", row.momentum.value},
             {"momentum_err_per_mm2", row.momentum.err},
             {"momentum_slices", row.momentum.n_slices},
             {"product", row.epr.product},
             {"product_err", row.epr.err},
             {"violation", row.epr.violation},
             {"significance_sd", row.epr.significance}});
    }
    return json{{"bound", 0.25}, {"rows", rows}};
}

int cmd_analyze(const std::string& nf_path, const std::string& ff_path,
                const std::string& report_path, bool assert_violation) {
    const epr::ScanDataset nf = epr::read_dataset(nf_path);
    const epr::ScanDataset ff = epr::read_dataset(ff_path);
    const epr::EprReport rep = epr::analyze_pair(nf, ff);
    std::cout << epr::format_report_table(rep);
    if (!report_path.empty()) {
        std::ofstream f(report_path);
        if (!f) throw epr::input_error("cannot write " + report_path);
        f << report_to_json(rep).dump(2) << '\n';
    }
    if (assert_violation) {
        for (const auto& row : rep.rows) {
            if (!row.epr.violation) {
                std::cerr << "no violation in at least one direction\n";
                return kExitAnalysis;
            }
        }
    }
    return 0;
}

int cmd_schmidt(const std::string& nf_path, const std::string& ff_path,
                const std::string& out_path, int bootstrap,
                std::int64_t seed) {
    const epr::ScanDataset nf = epr::read_dataset(nf_path);
    const epr::ScanDataset ff = epr::read_dataset(ff_path);
    json out = json::array();
    for (int arm = 1; arm <= 2; ++arm) {
        const auto gn = epr::singles_to_intensity(nf, arm, nf.lens);
        const auto gf = epr::singles_to_intensity(ff, arm, ff.lens);
        const auto est = epr::estimate_schmidt(
            gn, gf, bootstrap, static_cast<std::uint64_t>(seed));
        std::printf("arm %d: K = %.2f +- %.2f (uncorrected %.2f)\n", arm, est.k,
                    est.err, est.k_uncorrected);
        out.push_back({{"arm", arm},
                       {"K", est.k},
                       {"err", est.err},
                       {"K_uncorrected", est.k_uncorrected}});
    }
    if (!out_path.empty()) {
        std::ofstream f(out_path);
        if (!f) throw epr::input_error("cannot write " + out_path);
        f << out.dump(2) << '\n';
    }
    return 0;
}

int cmd_coincidence(const std::string& tags1, const std::string& tags2,
                    double window_ps, double bin_ps, double span_ps,
                    const std::string& hist_path) {
    const epr::TagStream a = epr::read_tag_file(tags1);
    const epr::TagStream b = epr::read_tag_file(tags2);
    const std::int64_t n = epr::count_coincidences(
        a, b, static_cast<std::int64_t>(window_ps));
    std::printf("tags: %zu / %zu, coincidences within +-%g ps: %lld\n",
                a.tags_ps.size(), b.tags_ps.size(), window_ps,
                static_cast<long long>(n));
    if (!hist_path.empty()) {
        const auto h = epr::coincidence_histogram(
            a, b, static_cast<std::int64_t>(bin_ps),
            static_cast<std::int64_t>(span_ps));
        std::ofstream f(hist_path);
        if (!f) throw epr::input_error("cannot write " + hist_path);
        f << "dt_ps,counts\n";
        for (std::size_t k = 0; k < h.counts.size(); ++k)
            f << h.bin_center_ps(k) << ',' << h.counts[k] << '\n';
    }
    return 0;
}

void write_grid_csv(const std::string& path, const epr::ScanDataset& ds,
                    int arm, const std::vector<double>& vals) {
    std::ofstream f(path);
    if (!f) throw epr::input_error("cannot write " + path);
    f << "x_um,y_um,value\n";
    const int n = ds.grid.n_steps;
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            const epr::Vec2 p =
                arm == 1 ? ds.grid.pos1_um(i, j) : ds.grid.pos2_um(i, j);
            f << p[0] << ',' << p[1] << ',' << vals[i * n + j] << '\n';
        }
    }
}

int cmd_heatmaps(const std::string& ds_path, const std::string& outdir) {
    const epr::ScanDataset ds = epr::read_dataset(ds_path);
    const int n = ds.grid.n_steps;
    const double npartner = static_cast<double>(n) * n;
    std::vector<double> avg1(n * n, 0.0), avg2(n * n, 0.0);
    std::vector<double> max1(n * n, 0.0), max2(n * n, 0.0);
    for (const auto& r : ds.records) {
        avg1[r.i1 * n + r.j1] += static_cast<double>(r.s1) / npartner;
        avg2[r.i2 * n + r.j2] += static_cast<double>(r.s2) / npartner;
        max1[r.i1 * n + r.j1] =
            std::max(max1[r.i1 * n + r.j1], static_cast<double>(r.cc));
        max2[r.i2 * n + r.j2] =
            std::max(max2[r.i2 * n + r.j2], static_cast<double>(r.cc));
    }
    const std::string base = outdir.empty() ? "." : outdir;
    write_grid_csv(base + "/singles_avg_arm1.csv", ds, 1, avg1);
    write_grid_csv(base + "/singles_avg_arm2.csv", ds, 2, avg2);
    write_grid_csv(base + "/ccmax_arm1.csv", ds, 1, max1);
    write_grid_csv(base + "/ccmax_arm2.csv", ds, 2, max2);
    std::printf("wrote 4 heatmap grids to %s\n", base.c_str());
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"SPDC raster-scan simulator and EPR/Schmidt analysis"};
    app.require_subcommand(1);

    std::string config_path, mode_str, out_path;
    std::int64_t seed = -1;
    int threads = 0;
    auto* sim = app.add_subcommand("simulate", "simulate a raster scan");
    sim->add_option("--config", config_path, "config JSON (or $EPRSCAN_CONFIG)");
    sim->add_option("--mode", mode_str, "nf or ff")->required();
    sim->add_option("--seed", seed, "override config seed");
    sim->add_option("--out", out_path, "output CSV path");
    sim->add_option("--threads", threads, "worker threads (0 = auto)");

    std::string nf_path, ff_path, report_path;
    bool assert_violation = false;
    auto* ana = app.add_subcommand("analyze", "EPR analysis of an nf/ff pair");
    ana->add_option("nf", nf_path, "near-field dataset CSV")->required();
    ana->add_option("ff", ff_path, "far-field dataset CSV")->required();
    ana->add_option("--report", report_path, "write report JSON here");
    ana->add_flag("--assert-violation", assert_violation,
                  "exit 1 unless every direction violates the bound");

    std::string s_nf, s_ff, s_out;
    int bootstrap = 200;
    std::int64_t s_seed = 1;
    auto* sch = app.add_subcommand("schmidt", "Schmidt-number estimate");
    sch->add_option("nf", s_nf, "near-field dataset CSV")->required();
    sch->add_option("ff", s_ff, "far-field dataset CSV")->required();
    sch->add_option("--out", s_out, "write K JSON here");
    sch->add_option("--bootstrap", bootstrap, "bootstrap resamples");
    sch->add_option("--seed", s_seed, "bootstrap seed");

    std::string tags1, tags2, hist_path;
    double window_ps = 300.0, bin_ps = 50.0, span_ps = 2000.0;
    auto* coi = app.add_subcommand("coincidence", "windowed coincidence count");
    coi->add_option("tags1", tags1, "tag file, channel 1")->required();
    coi->add_option("tags2", tags2, "tag file, channel 2")->required();
    coi->add_option("--window", window_ps, "coincidence window (ps)");
    coi->add_option("--hist-bin", bin_ps, "histogram bin (ps)");
    coi->add_option("--hist-span", span_ps, "histogram span (ps)");
    coi->add_option("--hist", hist_path, "write delay histogram CSV here");

    std::string hm_path, hm_outdir;
    auto* hm = app.add_subcommand("heatmaps", "averaged-singles and max-cc grids");
    hm->add_option("dataset", hm_path, "dataset CSV")->required();
    hm->add_option("--outdir", hm_outdir, "output directory");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e); // --help
        app.exit(e);
        return kExitUsage;
    }

    try {
        if (sim->parsed())
            return cmd_simulate(config_path, mode_str, seed, out_path, threads);
        if (ana->parsed())
            return cmd_analyze(nf_path, ff_path, report_path, assert_violation);
        if (sch->parsed())
            return cmd_schmidt(s_nf, s_ff, s_out, bootstrap, s_seed);
        if (coi->parsed())
            return cmd_coincidence(tags1, tags2, window_ps, bin_ps, span_ps,
                                   hist_path);
        if (hm->parsed()) return cmd_heatmaps(hm_path, hm_outdir);
    } catch (const epr::input_error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const epr::parameter_error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const epr::error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitAnalysis;
    }
    return kExitUsage;
}
