#include "epr/dataset_io.hpp"

#include "epr/errors.hpp"

#include <json.hpp>

#include <charconv>
#include <cstdio>
#include <fstream>

namespace epr {

using nlohmann::json;

namespace {

json source_to_json(const SourceParams& p) {
    return json{{"lambda_pump_nm", p.lambda_pump_nm},
                {"lambda_signal_nm", p.lambda_signal_nm},
                {"pump_waist_fwhm_um", p.pump_waist_fwhm_um},
                {"sigma_plus_mm", p.sigma_plus_mm},
                {"sigma_minus_mm", p.sigma_minus_mm},
                {"q_ring_per_mm", p.q_ring_per_mm},
                {"pair_rate_hz", p.pair_rate_hz}};
}

json lens_to_json(const LensConfig& c) {
    return json{{"f1_mm", c.f1_mm},
                {"f2_mm", c.f2_mm},
                {"f3_mm", c.f3_mm},
                {"lambda_signal_nm", c.lambda_signal_nm}};
}

json grid_to_json(const ScanGrid& g) {
    return json{{"n_steps", g.n_steps},
                {"step_um", g.step_um},
                {"center1_um", {g.center1_um[0], g.center1_um[1]}},
                {"center2_um", {g.center2_um[0], g.center2_um[1]}}};
}

json noise_to_json(const NoiseModel& m) {
    return json{{"dwell_s", m.dwell_s},
                {"window_ps", m.window_ps},
                {"dark1_hz", m.dark1_hz},
                {"dark2_hz", m.dark2_hz},
                {"collection_sigma_um", m.collection_sigma_um},
                {"efficiency1", m.efficiency1},
                {"efficiency2", m.efficiency2}};
}

template <typename T>
T get_field(const json& j, const char* key) {
    if (!j.contains(key))
        throw input_error(std::string("sidecar: missing field ") + key);
    return j.at(key).get<T>();
}

SourceParams source_from_json(const json& j) {
    SourceParams p;
    p.lambda_pump_nm = get_field<double>(j, "lambda_pump_nm");
    p.lambda_signal_nm = get_field<double>(j, "lambda_signal_nm");
    p.pump_waist_fwhm_um = get_field<double>(j, "pump_waist_fwhm_um");
    p.sigma_plus_mm = get_field<double>(j, "sigma_plus_mm");
    p.sigma_minus_mm = get_field<double>(j, "sigma_minus_mm");
    p.q_ring_per_mm = get_field<double>(j, "q_ring_per_mm");
    p.pair_rate_hz = get_field<double>(j, "pair_rate_hz");
    return p;
}

LensConfig lens_from_json(const json& j, PlaneMode mode) {
    LensConfig c;
    c.f1_mm = get_field<double>(j, "f1_mm");
    c.f2_mm = get_field<double>(j, "f2_mm");
    c.f3_mm = get_field<double>(j, "f3_mm");
    c.lambda_signal_nm = get_field<double>(j, "lambda_signal_nm");
    c.mode = mode;
    return c;
}

ScanGrid grid_from_json(const json& j) {
    ScanGrid g;
    g.n_steps = get_field<int>(j, "n_steps");
    g.step_um = get_field<double>(j, "step_um");
    const auto c1 = get_field<std::vector<double>>(j, "center1_um");
    const auto c2 = get_field<std::vector<double>>(j, "center2_um");
    if (c1.size() != 2 || c2.size() != 2)
        throw input_error("sidecar: centers must have two components");
    g.center1_um = {c1[0], c1[1]};
    g.center2_um = {c2[0], c2[1]};
    return g;
}

NoiseModel noise_from_json(const json& j) {
    NoiseModel m;
    m.dwell_s = get_field<double>(j, "dwell_s");
    m.window_ps = get_field<double>(j, "window_ps");
    m.dark1_hz = get_field<double>(j, "dark1_hz");
    m.dark2_hz = get_field<double>(j, "dark2_hz");
    m.collection_sigma_um = get_field<double>(j, "collection_sigma_um");
    m.efficiency1 = get_field<double>(j, "efficiency1");
    m.efficiency2 = get_field<double>(j, "efficiency2");
    return m;
}

} // namespace

std::string sidecar_path(const std::string& csv_path) {
    return csv_path + ".json";
}

void write_dataset(const ScanDataset& ds, const std::string& csv_path) {
    std::FILE* f = std::fopen(csv_path.c_str(), "wb");
    if (!f) throw input_error("cannot open " + csv_path + " for writing");
    std::fputs("i1,j1,i2,j2,x1_um,y1_um,x2_um,y2_um,s1,s2,cc,dwell_s\n", f);
    for (const auto& r : ds.records) {
        const Vec2 p1 = ds.grid.pos1_um(r.i1, r.j1);
        const Vec2 p2 = ds.grid.pos2_um(r.i2, r.j2);
        std::fprintf(f, "%u,%u,%u,%u,%.3f,%.3f,%.3f,%.3f,%lld,%lld,%lld,%.6g\n",
                     r.i1, r.j1, r.i2, r.j2, p1[0], p1[1], p2[0], p2[1],
                     static_cast<long long>(r.s1), static_cast<long long>(r.s2),
                     static_cast<long long>(r.cc), r.dwell_s);
    }
    if (std::fclose(f) != 0) throw input_error("short write to " + csv_path);

    json meta;
    meta["mode"] = ds.mode == PlaneMode::NearField ? "near_field" : "far_field";
    meta["seed"] = ds.seed;
    meta["source"] = source_to_json(ds.source);
    meta["lens"] = lens_to_json(ds.lens);
    meta["grid"] = grid_to_json(ds.grid);
    meta["noise"] = noise_to_json(ds.noise);
    std::ofstream sf(sidecar_path(csv_path));
    if (!sf) throw input_error("cannot write " + sidecar_path(csv_path));
    sf << meta.dump(2) << '\n';
}

ScanDataset read_dataset(const std::string& csv_path) {
    json meta;
    {
        std::ifstream sf(sidecar_path(csv_path));
        if (!sf) throw input_error("missing sidecar " + sidecar_path(csv_path));
        try {
            sf >> meta;
        } catch (const json::exception& e) {
            throw input_error("bad sidecar " + sidecar_path(csv_path) + ": " +
                              e.what());
        }
    }
    ScanDataset ds;
    const std::string mode = get_field<std::string>(meta, "mode");
    if (mode == "near_field")
        ds.mode = PlaneMode::NearField;
    else if (mode == "far_field")
        ds.mode = PlaneMode::FarField;
    else
        throw input_error("sidecar: unknown mode '" + mode + "'");
    ds.seed = get_field<std::uint64_t>(meta, "seed");
    ds.source = source_from_json(meta.at("source"));
    ds.lens = lens_from_json(meta.at("lens"), ds.mode);
    ds.grid = grid_from_json(meta.at("grid"));
    ds.noise = noise_from_json(meta.at("noise"));
    ds.source.validate();
    ds.lens.validate();
    ds.grid.validate();
    ds.noise.validate();

    std::ifstream f(csv_path);
    if (!f) throw input_error("cannot open " + csv_path);
    std::string line;
    if (!std::getline(f, line))
        throw input_error(csv_path + ": empty file");
    if (line.rfind("i1,j1,i2,j2", 0) != 0)
        throw input_error(csv_path + ": unexpected header");

    ds.records.reserve(ds.grid.total_points());
    std::size_t lineno = 1;
    while (std::getline(f, line)) {
        ++lineno;
        if (line.empty()) continue;
        ScanRecord r{};
        long long v[12] = {};
        double d[12] = {};
        const char* ptr = line.data();
        const char* end = line.data() + line.size();
        int field = 0;
        bool ok = true;
        while (field < 12 && ptr <= end && ok) {
            const char* stop = ptr;
            while (stop < end && *stop != ',') ++stop;
            if (field <= 3 || (field >= 8 && field <= 10)) {
                auto [q, ec] = std::from_chars(ptr, stop, v[field]);
                ok = ec == std::errc{} && q == stop;
            } else {
                char* e2 = nullptr;
                d[field] = std::strtod(std::string(ptr, stop).c_str(), &e2);
                ok = true;
            }
            ptr = stop + 1;
            ++field;
        }
        if (!ok || field != 12)
            throw input_error(csv_path + ":" + std::to_string(lineno) +
                              ": malformed row");
        r.i1 = static_cast<std::uint16_t>(v[0]);
        r.j1 = static_cast<std::uint16_t>(v[1]);
        r.i2 = static_cast<std::uint16_t>(v[2]);
        r.j2 = static_cast<std::uint16_t>(v[3]);
        r.s1 = v[8];
        r.s2 = v[9];
        r.cc = v[10];
        r.dwell_s = d[11];
        if (r.s1 < 0 || r.s2 < 0 || r.cc < 0)
            throw input_error(csv_path + ":" + std::to_string(lineno) +
                              ": negative count");
        ds.records.push_back(r);
    }
    if (ds.records.size() != ds.grid.total_points())
        throw input_error(csv_path + ": expected " +
                          std::to_string(ds.grid.total_points()) + " rows, got " +
                          std::to_string(ds.records.size()));
    return ds;
}

} // namespace epr
