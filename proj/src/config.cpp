#include "epr/config.hpp"

#include "epr/errors.hpp"

#include <json.hpp>

#include <fstream>
#include <initializer_list>
#include <set>
#include <sstream>

namespace epr {

using nlohmann::json;

namespace {

void reject_unknown(const json& j, const std::string& where,
                    std::initializer_list<const char*> allowed) {
    std::set<std::string> ok(allowed.begin(), allowed.end());
    for (const auto& [key, value] : j.items()) {
        (void)value;
        if (!ok.count(key))
            throw input_error("config: unknown key '" + key + "' in " + where);
    }
}

double num(const json& j, const char* key, double fallback) {
    if (!j.contains(key)) return fallback;
    if (!j.at(key).is_number())
        throw input_error(std::string("config: field '") + key +
                          "' must be a number");
    return j.at(key).get<double>();
}

Vec2 vec2(const json& j, const char* key, const Vec2& fallback) {
    if (!j.contains(key)) return fallback;
    const auto v = j.at(key).get<std::vector<double>>();
    if (v.size() != 2)
        throw input_error(std::string("config: field '") + key +
                          "' must have two components");
    return {v[0], v[1]};
}

} // namespace

RunConfig RunConfig::defaults() { return RunConfig{}; }

RunConfig RunConfig::parse(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw input_error(std::string("config: parse error: ") + e.what());
    }
    if (!j.is_object()) throw input_error("config: top level must be an object");
    reject_unknown(j, "top level",
                   {"source", "lens", "grid", "noise", "seed", "out"});

    RunConfig cfg;
    if (j.contains("source")) {
        const json& s = j.at("source");
        reject_unknown(s, "source",
                       {"lambda_pump_nm", "lambda_signal_nm",
                        "pump_waist_fwhm_um", "sigma_plus_mm", "sigma_minus_mm",
                        "q_ring_per_mm", "pair_rate_hz"});
        SourceParams& p = cfg.source;
        p.lambda_pump_nm = num(s, "lambda_pump_nm", p.lambda_pump_nm);
        p.lambda_signal_nm = num(s, "lambda_signal_nm", p.lambda_signal_nm);
        if (s.contains("pump_waist_fwhm_um") && !s.contains("sigma_plus_mm")) {
            p = SourceParams::from_pump(s.at("pump_waist_fwhm_um").get<double>());
            p.lambda_pump_nm = num(s, "lambda_pump_nm", p.lambda_pump_nm);
            p.lambda_signal_nm = num(s, "lambda_signal_nm", p.lambda_signal_nm);
        } else {
            p.pump_waist_fwhm_um = num(s, "pump_waist_fwhm_um", p.pump_waist_fwhm_um);
            p.sigma_plus_mm = num(s, "sigma_plus_mm", p.sigma_plus_mm);
        }
        p.sigma_minus_mm = num(s, "sigma_minus_mm", p.sigma_minus_mm);
        p.q_ring_per_mm = num(s, "q_ring_per_mm", p.q_ring_per_mm);
        p.pair_rate_hz = num(s, "pair_rate_hz", p.pair_rate_hz);
    }
    if (j.contains("lens")) {
        const json& l = j.at("lens");
        reject_unknown(l, "lens", {"f1_mm", "f2_mm", "f3_mm"});
        cfg.lens.f1_mm = num(l, "f1_mm", cfg.lens.f1_mm);
        cfg.lens.f2_mm = num(l, "f2_mm", cfg.lens.f2_mm);
        cfg.lens.f3_mm = num(l, "f3_mm", cfg.lens.f3_mm);
    }
    cfg.lens.lambda_signal_nm = cfg.source.lambda_signal_nm;
    if (j.contains("grid")) {
        const json& g = j.at("grid");
        reject_unknown(g, "grid", {"n_steps", "step_um", "center1_um", "center2_um"});
        if (g.contains("n_steps")) {
            if (!g.at("n_steps").is_number_integer())
                throw input_error("config: grid.n_steps must be an integer");
            cfg.grid.n_steps = g.at("n_steps").get<int>();
        }
        cfg.grid.step_um = num(g, "step_um", cfg.grid.step_um);
        cfg.grid.center1_um = vec2(g, "center1_um", cfg.grid.center1_um);
        cfg.grid.center2_um = vec2(g, "center2_um", cfg.grid.center2_um);
    }
    if (j.contains("noise")) {
        const json& m = j.at("noise");
        reject_unknown(m, "noise",
                       {"dwell_s", "window_ps", "dark1_hz", "dark2_hz",
                        "collection_sigma_um", "efficiency1", "efficiency2"});
        NoiseModel& nm = cfg.noise;
        nm.dwell_s = num(m, "dwell_s", nm.dwell_s);
        nm.window_ps = num(m, "window_ps", nm.window_ps);
        nm.dark1_hz = num(m, "dark1_hz", nm.dark1_hz);
        nm.dark2_hz = num(m, "dark2_hz", nm.dark2_hz);
        nm.collection_sigma_um = num(m, "collection_sigma_um", nm.collection_sigma_um);
        nm.efficiency1 = num(m, "efficiency1", nm.efficiency1);
        nm.efficiency2 = num(m, "efficiency2", nm.efficiency2);
    }
    if (j.contains("seed")) {
        if (!j.at("seed").is_number_integer())
            throw input_error("config: seed must be an integer");
        cfg.seed = j.at("seed").get<std::uint64_t>();
    }
    if (j.contains("out")) cfg.out_path = j.at("out").get<std::string>();

    cfg.validate();
    return cfg;
}

RunConfig RunConfig::load(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw input_error("cannot open config " + path);
    std::ostringstream os;
    os << f.rdbuf();
    try {
        return parse(os.str());
    } catch (const input_error& e) {
        throw input_error(path + ": " + e.what());
    }
}

void RunConfig::validate() const {
    source.validate();
    lens.validate();
    grid.validate();
    noise.validate();
}

} // namespace epr
