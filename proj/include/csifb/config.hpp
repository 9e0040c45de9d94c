// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "csifb/grid.hpp"

namespace csifb {

struct SsccConfig {
    int q = 4;               // bits per dimension
    double r = 1.0;          // code rate
    int a = 256;             // constellation size (power of 4)
    double ber = 0.0;        // BSC flip probability
    std::string bit_channel = "perfect";  // "perfect" | "bsc"
    double clip_halfwidth = 3.0;          // quantizer range [-c, c]
};

struct ChannelConfig {
    double rho_pol = 0.7;
    double xpd_db = 8.0;
    std::string uplink_gains = "independent";  // "independent" | "shared"
    int l_min = 3;
    int l_max = 8;
    double angle_max = M_PI / 3.0;  // radians
};

struct SystemConfig {
    int K = 2;
    int N_t = 8;
    int N_r = 2;
    int N_c = 8;
    int N_RF = 2;
    int N_s = 1;
    int m = 4;
    int d_model = 32;
    int L1 = 1, L2 = 1, L3 = 1, L4 = 1, L5 = 1;
    double f_s = 15.36e6;  // Hz

    // network wiring
    bool cpi = true;
    bool cpi_shared = true;
    std::string cpi_softmax = "col";      // "col" | "row"
    std::string mab_wiring = "parallel";  // "parallel" | "serial"
    int l2_width = 0;                     // post-CPI trunk width; 0 -> d_model

    int trunk2_width() const { return l2_width > 0 ? l2_width : d_model; }
};

struct UplinkConfig {
    std::string mode = "simultaneous";  // "simultaneous" | "tdma_mrc" | "awgn" | "sscc"
    double snr_ul_db = 0.0;
    SsccConfig sscc;

    double sigma_u() const { return std::sqrt(std::pow(10.0, -snr_ul_db / 10.0)); }
};

struct TrainConfig {
    int batch = 16;
    int steps = 500;
    int warmup = 4000;
    double factor = 1.0;
    uint64_t seed = 1;
    double snr_dl_db = 10.0;
    std::string dataset;

    double sigma_d() const { return std::sqrt(std::pow(10.0, -snr_dl_db / 10.0)); }
};

struct EvalConfig {
    std::vector<double> snr_dl_grid_db = {-10, -5, 0, 5, 10, 15, 20};
    int samples = 64;
    int noise_draws = 4;
    uint64_t seed = 7;
};

struct ExperimentConfig {
    SystemConfig system;
    ChannelConfig channel;
    UplinkConfig uplink;
    TrainConfig train;
    EvalConfig eval;

    // Desk-scale configuration: small enough for CPU experiments.
    static ExperimentConfig desk_default();
    // Paper-scale numerology (for parameter accounting, not CPU training).
    static ExperimentConfig paper_default();
    // Minimal configuration for gradient checks and CI smoke runs.
    static ExperimentConfig smoke_default();

    // Full materialized JSON (every key explicit) and a digest over its
    // canonical dump. Unknown keys or wrong types raise ConfigError listing
    // the offending keys.
    std::string to_json_string(int indent = 2) const;
    static ExperimentConfig from_json_string(const std::string& text);
    static ExperimentConfig load_file(const std::string& path);
    void save_file(const std::string& path) const;

    // Applies "a.b.c=value" overrides on the JSON representation.
    static ExperimentConfig with_overrides(const ExperimentConfig& base,
                                           const std::vector<std::string>& overrides);

    std::string digest() const;
    void validate() const;
};

double snr_db_to_sigma(double snr_db);

}  // namespace csifb
