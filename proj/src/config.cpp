// SPDX-License-Identifier: Apache-2.0

#include "csifb/config.hpp"

#include <fstream>
#include <sstream>

#include "csifb/rng.hpp"
#include "json.hpp"

namespace csifb {

using nlohmann::json;

double snr_db_to_sigma(double snr_db) { return std::sqrt(std::pow(10.0, -snr_db / 10.0)); }

namespace {

json sscc_to_json(const SsccConfig& c) {
    return json{{"q", c.q},
                {"r", c.r},
                {"a", c.a},
                {"ber", c.ber},
                {"bit_channel", c.bit_channel},
                {"clip_halfwidth", c.clip_halfwidth}};
}

json to_json(const ExperimentConfig& c) {
    json j;
    j["system"] = {{"K", c.system.K},
                   {"N_t", c.system.N_t},
                   {"N_r", c.system.N_r},
                   {"N_c", c.system.N_c},
                   {"N_RF", c.system.N_RF},
                   {"N_s", c.system.N_s},
                   {"m", c.system.m},
                   {"d_model", c.system.d_model},
                   {"L1", c.system.L1},
                   {"L2", c.system.L2},
                   {"L3", c.system.L3},
                   {"L4", c.system.L4},
                   {"L5", c.system.L5},
                   {"f_s_hz", c.system.f_s}};
    j["model"] = {{"cpi", c.system.cpi},
                  {"cpi_shared", c.system.cpi_shared},
                  {"cpi_softmax", c.system.cpi_softmax},
                  {"mab_wiring", c.system.mab_wiring},
                  {"l2_width", c.system.l2_width}};
    j["channel"] = {{"rho_pol", c.channel.rho_pol},
                    {"xpd_db", c.channel.xpd_db},
                    {"uplink_gains", c.channel.uplink_gains},
                    {"l_min", c.channel.l_min},
                    {"l_max", c.channel.l_max},
                    {"angle_max_rad", c.channel.angle_max}};
    j["uplink"] = {{"mode", c.uplink.mode},
                   {"snr_ul_db", c.uplink.snr_ul_db},
                   {"sscc", sscc_to_json(c.uplink.sscc)}};
    j["train"] = {{"batch", c.train.batch},
                  {"steps", c.train.steps},
                  {"warmup", c.train.warmup},
                  {"factor", c.train.factor},
                  {"seed", c.train.seed},
                  {"snr_dl_db", c.train.snr_dl_db},
                  {"dataset", c.train.dataset}};
    j["eval"] = {{"snr_dl_grid_db", c.eval.snr_dl_grid_db},
                 {"samples", c.eval.samples},
                 {"noise_draws", c.eval.noise_draws},
                 {"seed", c.eval.seed}};
    return j;
}

// Strict field reader: records unknown keys and type mismatches.
struct Reader {
    std::vector<std::string> errors;

    void check_keys(const json& j, const std::string& scope,
                    const std::vector<std::string>& known) {
        if (!j.is_object()) {
            errors.push_back(scope + ": expected object");
            return;
        }
        for (auto it = j.begin(); it != j.end(); ++it) {
            bool ok = false;
            for (const auto& k : known)
                if (it.key() == k) ok = true;
            if (!ok) errors.push_back(scope + "." + it.key() + ": unknown key");
        }
    }

    template <typename T>
    void get(const json& j, const std::string& scope, const std::string& key, T& out) {
        if (!j.is_object() || !j.contains(key)) return;  // keep default
        try {
            out = j.at(key).get<T>();
        } catch (const json::exception&) {
            errors.push_back(scope + "." + key + ": wrong type");
        }
    }
};

ExperimentConfig parse(const json& j) {
    ExperimentConfig c = ExperimentConfig::desk_default();
    Reader r;
    r.check_keys(j, "config", {"system", "model", "channel", "uplink", "train", "eval"});
    if (j.contains("system")) {
        const json& s = j["system"];
        r.check_keys(s, "system",
                     {"K", "N_t", "N_r", "N_c", "N_RF", "N_s", "m", "d_model", "L1", "L2", "L3",
                      "L4", "L5", "f_s_hz"});
        r.get(s, "system", "K", c.system.K);
        r.get(s, "system", "N_t", c.system.N_t);
        r.get(s, "system", "N_r", c.system.N_r);
        r.get(s, "system", "N_c", c.system.N_c);
        r.get(s, "system", "N_RF", c.system.N_RF);
        r.get(s, "system", "N_s", c.system.N_s);
        r.get(s, "system", "m", c.system.m);
        r.get(s, "system", "d_model", c.system.d_model);
        r.get(s, "system", "L1", c.system.L1);
        r.get(s, "system", "L2", c.system.L2);
        r.get(s, "system", "L3", c.system.L3);
        r.get(s, "system", "L4", c.system.L4);
        r.get(s, "system", "L5", c.system.L5);
        r.get(s, "system", "f_s_hz", c.system.f_s);
    }
    if (j.contains("model")) {
        const json& s = j["model"];
        r.check_keys(s, "model", {"cpi", "cpi_shared", "cpi_softmax", "mab_wiring", "l2_width"});
        r.get(s, "model", "cpi", c.system.cpi);
        r.get(s, "model", "cpi_shared", c.system.cpi_shared);
        r.get(s, "model", "cpi_softmax", c.system.cpi_softmax);
        r.get(s, "model", "mab_wiring", c.system.mab_wiring);
        r.get(s, "model", "l2_width", c.system.l2_width);
    }
    if (j.contains("channel")) {
        const json& s = j["channel"];
        r.check_keys(s, "channel",
                     {"rho_pol", "xpd_db", "uplink_gains", "l_min", "l_max", "angle_max_rad"});
        r.get(s, "channel", "rho_pol", c.channel.rho_pol);
        r.get(s, "channel", "xpd_db", c.channel.xpd_db);
        r.get(s, "channel", "uplink_gains", c.channel.uplink_gains);
        r.get(s, "channel", "l_min", c.channel.l_min);
        r.get(s, "channel", "l_max", c.channel.l_max);
        r.get(s, "channel", "angle_max_rad", c.channel.angle_max);
    }
    if (j.contains("uplink")) {
        const json& s = j["uplink"];
        r.check_keys(s, "uplink", {"mode", "snr_ul_db", "sscc"});
        r.get(s, "uplink", "mode", c.uplink.mode);
        r.get(s, "uplink", "snr_ul_db", c.uplink.snr_ul_db);
        if (s.contains("sscc")) {
            const json& q = s["sscc"];
            r.check_keys(q, "uplink.sscc",
                         {"q", "r", "a", "ber", "bit_channel", "clip_halfwidth"});
            r.get(q, "uplink.sscc", "q", c.uplink.sscc.q);
            r.get(q, "uplink.sscc", "r", c.uplink.sscc.r);
            r.get(q, "uplink.sscc", "a", c.uplink.sscc.a);
            r.get(q, "uplink.sscc", "ber", c.uplink.sscc.ber);
            r.get(q, "uplink.sscc", "bit_channel", c.uplink.sscc.bit_channel);
            r.get(q, "uplink.sscc", "clip_halfwidth", c.uplink.sscc.clip_halfwidth);
        }
    }
    if (j.contains("train")) {
        const json& s = j["train"];
        r.check_keys(s, "train",
                     {"batch", "steps", "warmup", "factor", "seed", "snr_dl_db", "dataset"});
        r.get(s, "train", "batch", c.train.batch);
        r.get(s, "train", "steps", c.train.steps);
        r.get(s, "train", "warmup", c.train.warmup);
        r.get(s, "train", "factor", c.train.factor);
        r.get(s, "train", "seed", c.train.seed);
        r.get(s, "train", "snr_dl_db", c.train.snr_dl_db);
        r.get(s, "train", "dataset", c.train.dataset);
    }
    if (j.contains("eval")) {
        const json& s = j["eval"];
        r.check_keys(s, "eval", {"snr_dl_grid_db", "samples", "noise_draws", "seed"});
        r.get(s, "eval", "snr_dl_grid_db", c.eval.snr_dl_grid_db);
        r.get(s, "eval", "samples", c.eval.samples);
        r.get(s, "eval", "noise_draws", c.eval.noise_draws);
        r.get(s, "eval", "seed", c.eval.seed);
    }
    if (!r.errors.empty()) {
        std::string msg = "config schema errors:";
        for (const auto& e : r.errors) msg += "\n  " + e;
        throw ConfigError(msg);
    }
    c.validate();
    return c;
}

}  // namespace

ExperimentConfig ExperimentConfig::desk_default() {
    ExperimentConfig c;
    return c;
}

ExperimentConfig ExperimentConfig::paper_default() {
    ExperimentConfig c;
    c.system.K = 2;
    c.system.N_t = 64;
    c.system.N_r = 2;
    c.system.N_c = 32;
    c.system.N_RF = 2;
    c.system.m = 10;
    c.system.d_model = 256;
    c.system.L1 = 1;
    c.system.L2 = 2;
    c.system.L3 = 1;
    c.system.L4 = 2;
    c.system.L5 = 2;
    c.train.batch = 256;
    return c;
}

ExperimentConfig ExperimentConfig::smoke_default() {
    ExperimentConfig c;
    c.system.K = 2;
    c.system.N_t = 8;
    c.system.N_c = 8;
    c.system.N_r = 2;
    c.system.N_RF = 2;
    c.system.m = 4;
    c.system.d_model = 16;
    c.system.L1 = c.system.L2 = c.system.L3 = c.system.L4 = c.system.L5 = 1;
    c.train.batch = 8;
    c.train.steps = 200;
    c.train.warmup = 100;
    c.eval.samples = 32;
    return c;
}

std::string ExperimentConfig::to_json_string(int indent) const {
    return to_json(*this).dump(indent);
}

ExperimentConfig ExperimentConfig::from_json_string(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config parse error: ") + e.what());
    }
    return parse(j);
}

ExperimentConfig ExperimentConfig::load_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config file: " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return from_json_string(ss.str());
}

void ExperimentConfig::save_file(const std::string& path) const {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write config file: " + path);
    out << to_json_string() << "\n";
}

ExperimentConfig ExperimentConfig::with_overrides(const ExperimentConfig& base,
                                                  const std::vector<std::string>& overrides) {
    json j = json::parse(base.to_json_string());
    for (const auto& ov : overrides) {
        auto eq = ov.find('=');
        if (eq == std::string::npos)
            throw ConfigError("override must be key=value, got: " + ov);
        std::string path = ov.substr(0, eq);
        std::string value = ov.substr(eq + 1);
        json* cur = &j;
        size_t pos = 0;
        while (true) {
            size_t dot = path.find('.', pos);
            std::string key = path.substr(pos, dot == std::string::npos ? dot : dot - pos);
            if (dot == std::string::npos) {
                json v;
                try {
                    v = json::parse(value);
                } catch (const json::exception&) {
                    v = value;  // bare string
                }
                (*cur)[key] = v;
                break;
            }
            cur = &(*cur)[key];
            pos = dot + 1;
        }
    }
    return parse(j);
}

std::string ExperimentConfig::digest() const {
    // nlohmann objects iterate in key order, so the dump is canonical.
    uint64_t h = fnv1a64_str(to_json(*this).dump());
    char buf[17];
    snprintf(buf, sizeof(buf), "%016llx", (unsigned long long)h);
    return std::string(buf);
}

void ExperimentConfig::validate() const {
    std::vector<std::string> bad;
    if (system.N_r != 2) bad.push_back("system.N_r (dual-polarized pair: must be 2)");
    if (system.N_s != 1) bad.push_back("system.N_s (single-stream only: must be 1)");
    if (system.m < 1 || system.m > system.N_c) bad.push_back("system.m (need 1 <= m <= N_c)");
    if (system.K < 1) bad.push_back("system.K");
    if (system.N_RF < system.K) bad.push_back("system.N_RF (need N_RF >= K)");
    if (system.N_t < system.N_RF) bad.push_back("system.N_t (need N_t >= N_RF)");
    if (system.d_model < 2 || system.d_model % 2) bad.push_back("system.d_model (even, >= 2)");
    if (system.l2_width < 0 || system.l2_width % 2) bad.push_back("model.l2_width (even, >= 0)");
    if (system.L1 < 0 || system.L2 < 0 || system.L3 < 0 || system.L4 < 0 || system.L5 < 0)
        bad.push_back("system.L1..L5 (nonnegative)");
    if (system.f_s <= 0) bad.push_back("system.f_s_hz");
    if (system.cpi_softmax != "col" && system.cpi_softmax != "row")
        bad.push_back("model.cpi_softmax (col|row)");
    if (system.mab_wiring != "parallel" && system.mab_wiring != "serial")
        bad.push_back("model.mab_wiring (parallel|serial)");
    if (channel.rho_pol < -1 || channel.rho_pol > 1) bad.push_back("channel.rho_pol");
    if (channel.l_min < 1 || channel.l_max < channel.l_min) bad.push_back("channel.l_min/l_max");
    if (channel.uplink_gains != "independent" && channel.uplink_gains != "shared")
        bad.push_back("channel.uplink_gains (independent|shared)");
    if (uplink.mode != "simultaneous" && uplink.mode != "tdma_mrc" && uplink.mode != "awgn" &&
        uplink.mode != "sscc")
        bad.push_back("uplink.mode (simultaneous|tdma_mrc|awgn|sscc)");
    if (uplink.sscc.q < 1 || uplink.sscc.q > 24) bad.push_back("uplink.sscc.q (1..24)");
    if (uplink.sscc.r <= 0 || uplink.sscc.r > 1) bad.push_back("uplink.sscc.r ((0,1])");
    if (uplink.sscc.a < 2 || (uplink.sscc.a & (uplink.sscc.a - 1)))
        bad.push_back("uplink.sscc.a (power of 2)");
    if (uplink.sscc.ber < 0 || uplink.sscc.ber > 1) bad.push_back("uplink.sscc.ber");
    if (uplink.sscc.bit_channel != "perfect" && uplink.sscc.bit_channel != "bsc")
        bad.push_back("uplink.sscc.bit_channel (perfect|bsc)");
    if (train.batch < 1) bad.push_back("train.batch");
    if (train.steps < 0) bad.push_back("train.steps");
    if (train.warmup < 1) bad.push_back("train.warmup");
    if (eval.samples < 1) bad.push_back("eval.samples");
    if (eval.noise_draws < 1) bad.push_back("eval.noise_draws");
    if (!bad.empty()) {
        std::string msg = "invalid config values:";
        for (const auto& b : bad) msg += "\n  " + b;
        throw ConfigError(msg);
    }
}

}  // namespace csifb
