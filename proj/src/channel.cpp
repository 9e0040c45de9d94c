// SPDX-License-Identifier: Apache-2.0

#include "csifb/channel.hpp"

#include <cstring>
#include <fstream>

namespace csifb {

ComplexGrid steering_vector(double angle, int n) {
    if (n < 1) throw DimensionError("steering_vector: need n >= 1");
    ComplexGrid d({n, 1});
    double s = std::sin(angle);
    for (int i = 0; i < n; ++i) {
        double ph = -M_PI * i * s;
        d.set2(i, 0, {std::cos(ph), std::sin(ph)});
    }
    return d;
}

ComplexGrid synth_channel(const PathSet& ps, const SystemConfig& sys,
                          LinkDirection direction) {
    if (ps.paths.empty()) throw DegenerateInputError("synth_channel: empty path set");
    const int nc = sys.N_c, nr = sys.N_r, nt = sys.N_t;
    const double L = (double)ps.paths.size();
    const double amp = std::sqrt((double)(nt * nr) / L);
    const bool down = direction == LinkDirection::Downlink;
    // Downlink rows: UE receive ports; uplink rows: BS antennas.
    ComplexGrid h(down ? Shape{nc, nr, nt} : Shape{nc, nt, nr});

    for (const Path& p : ps.paths) {
        ComplexGrid d_ue = steering_vector(p.aoa, nr);
        ComplexGrid d_bs = steering_vector(p.aod, nt);
        double dphase = -2.0 * M_PI * p.delay * sys.f_s / (double)nc;
        for (int n = 0; n < nc; ++n) {
            std::complex<double> ramp{std::cos(dphase * n), std::sin(dphase * n)};
            for (int r = 0; r < nr; ++r) {
                std::complex<double> beta = down ? ((r % 2 == 0) ? p.beta_h : p.beta_v)
                                                 : ((r % 2 == 0) ? p.beta_ul_h : p.beta_ul_v);
                std::complex<double> scaled = amp * beta * ramp;
                for (int t = 0; t < nt; ++t) {
                    // H = amp * beta * ramp * d_rx * d_tx^H with the receive
                    // side at the UE (downlink) or the BS (uplink).
                    std::complex<double> v =
                        down ? scaled * d_ue.at2(r, 0) * std::conj(d_bs.at2(t, 0))
                             : scaled * d_bs.at2(t, 0) * std::conj(d_ue.at2(r, 0));
                    int64_t idx = down ? ((int64_t)n * nr + r) * nt + t
                                       : ((int64_t)n * nt + t) * nr + r;
                    h.set(idx, h.at(idx) + v);
                }
            }
        }
    }
    h.ensure_finite("synth_channel output");
    return h;
}

PathSet draw_paths(Rng& rng, const SystemConfig& sys, const ChannelConfig& chan) {
    PathSet ps;
    int L = rng.uniform_int(chan.l_min, chan.l_max);
    double tau_max = (double)sys.N_c / (4.0 * sys.f_s);
    // Co-polar power fraction; 1/sqrt(1 + 10^(-xpd/10)) is stable as
    // xpd_db -> inf.
    double kappa = 1.0 / std::sqrt(1.0 + std::pow(10.0, -chan.xpd_db / 10.0));
    double rho = chan.rho_pol;
    double ortho = std::sqrt(std::max(0.0, 1.0 - rho * rho));
    for (int l = 0; l < L; ++l) {
        Path p;
        p.aod = rng.uniform(-chan.angle_max, chan.angle_max);
        p.aoa = rng.uniform(-chan.angle_max, chan.angle_max);
        p.delay = rng.uniform(0.0, tau_max);
        auto g = rng.cnormal();
        auto w = rng.cnormal();
        p.beta_h = g;
        p.beta_v = kappa * (rho * g + ortho * w);
        if (chan.uplink_gains == "shared") {
            p.beta_ul_h = p.beta_h;
            p.beta_ul_v = p.beta_v;
        } else {
            auto gu = rng.cnormal();
            auto wu = rng.cnormal();
            p.beta_ul_h = gu;
            p.beta_ul_v = kappa * (rho * gu + ortho * wu);
        }
        ps.paths.push_back(p);
    }
    return ps;
}

namespace {

// Scales a per-user block (size `block`) of g starting at offset so its
// squared Frobenius norm equals `target`.
void normalize_block(ComplexGrid& g, int64_t offset, int64_t block, double target) {
    double e = 0;
    for (int64_t i = offset; i < offset + block; ++i)
        e += g.re[i] * g.re[i] + g.im[i] * g.im[i];
    if (e <= 0.0) throw DegenerateInputError("normalize_sample: zero channel block");
    double s = std::sqrt(target / e);
    for (int64_t i = offset; i < offset + block; ++i) {
        g.re[i] *= s;
        g.im[i] *= s;
    }
}

}  // namespace

void normalize_sample(ChannelSample& sample) {
    const Shape& sd = sample.H_d.shape();
    int K = sd[0];
    int64_t block_d = sample.H_d.size() / K;
    int64_t block_u = sample.H_u.size() / K;
    double target = (double)block_d;  // N_c * N_r * N_t
    for (int k = 0; k < K; ++k) {
        normalize_block(sample.H_d, (int64_t)k * block_d, block_d, target);
        normalize_block(sample.H_u, (int64_t)k * block_u, block_u, (double)block_u);
    }
}

ChannelSample make_sample(const SystemConfig& sys, const ChannelConfig& chan, uint64_t seed) {
    ChannelSample s;
    s.seed = seed;
    s.H_d = ComplexGrid({sys.K, sys.N_c, sys.N_r, sys.N_t});
    s.H_u = ComplexGrid({sys.K, sys.N_c, sys.N_t, sys.N_r});
    int64_t block_d = (int64_t)sys.N_c * sys.N_r * sys.N_t;
    int64_t block_u = (int64_t)sys.N_c * sys.N_t * sys.N_r;
    for (int k = 0; k < sys.K; ++k) {
        Rng rng(substream(seed, {(uint64_t)k, 0x636861ULL /* "cha" */}));
        PathSet ps = draw_paths(rng, sys, chan);
        ComplexGrid hd = synth_channel(ps, sys, LinkDirection::Downlink);
        ComplexGrid hu = synth_channel(ps, sys, LinkDirection::Uplink);
        std::copy(hd.re.data.begin(), hd.re.data.end(),
                  s.H_d.re.data.begin() + k * block_d);
        std::copy(hd.im.data.begin(), hd.im.data.end(),
                  s.H_d.im.data.begin() + k * block_d);
        std::copy(hu.re.data.begin(), hu.re.data.end(),
                  s.H_u.re.data.begin() + k * block_u);
        std::copy(hu.im.data.begin(), hu.im.data.end(),
                  s.H_u.im.data.begin() + k * block_u);
        s.paths.push_back(std::move(ps));
    }
    normalize_sample(s);
    return s;
}

// ---------------------------------------------------------------------------
// dataset io
// ---------------------------------------------------------------------------

namespace {

constexpr char kMagic[4] = {'C', 'S', 'I', 'D'};
constexpr uint16_t kVersion = 1;

template <typename T>
void write_le(std::ostream& out, T v) {
    // Little-endian host assumed; asserted at dataset-write time.
    out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T read_le(std::istream& in) {
    T v{};
    in.read(reinterpret_cast<char*>(&v), sizeof(T));
    return v;
}

void write_grid_f32(std::ostream& out, const ComplexGrid& g) {
    for (int64_t i = 0; i < g.size(); ++i) {
        write_le(out, (float)g.re[i]);
        write_le(out, (float)g.im[i]);
    }
}

void read_grid_f32(std::istream& in, ComplexGrid& g) {
    for (int64_t i = 0; i < g.size(); ++i) {
        g.re[i] = (double)read_le<float>(in);
        g.im[i] = (double)read_le<float>(in);
    }
}

void check_le_host() {
    uint16_t probe = 1;
    char b;
    std::memcpy(&b, &probe, 1);
    if (b != 1) throw IoError("dataset io requires a little-endian host");
}

}  // namespace

void generate_dataset(const SystemConfig& sys, const ChannelConfig& chan, int count,
                      uint64_t seed, const std::string& path) {
    check_le_host();
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open dataset for writing: " + path);
    out.write(kMagic, 4);
    write_le(out, kVersion);
    write_le(out, (uint32_t)count);
    write_le(out, (uint32_t)sys.K);
    write_le(out, (uint32_t)sys.N_c);
    write_le(out, (uint32_t)sys.N_r);
    write_le(out, (uint32_t)sys.N_t);
    write_le(out, (uint64_t)seed);
    for (int i = 0; i < count; ++i) {
        ChannelSample s = make_sample(sys, chan, seed + (uint64_t)i);
        write_grid_f32(out, s.H_d);
        write_grid_f32(out, s.H_u);
    }
    if (!out) throw IoError("write failure on dataset: " + path);
}

DatasetHeader read_dataset_header(const std::string& path) {
    check_le_host();
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open dataset: " + path);
    char magic[4];
    in.read(magic, 4);
    if (!in || std::memcmp(magic, kMagic, 4) != 0)
        throw IoError("bad dataset magic in " + path);
    uint16_t version = read_le<uint16_t>(in);
    if (version != kVersion)
        throw IoError("unsupported dataset version " + std::to_string(version) + " in " + path);
    DatasetHeader h;
    h.count = read_le<uint32_t>(in);
    h.K = read_le<uint32_t>(in);
    h.N_c = read_le<uint32_t>(in);
    h.N_r = read_le<uint32_t>(in);
    h.N_t = read_le<uint32_t>(in);
    h.base_seed = read_le<uint64_t>(in);
    if (!in) throw IoError("truncated dataset header in " + path);
    return h;
}

std::vector<ChannelSample> load_dataset(const std::string& path, int first, int count) {
    DatasetHeader h = read_dataset_header(path);
    if (count < 0) count = (int)h.count - first;
    if (first < 0 || first + count > (int)h.count)
        throw IoError("dataset range out of bounds in " + path);
    std::ifstream in(path, std::ios::binary);
    in.seekg(4 + 2 + 5 * 4 + 8);
    int64_t per_sample =
        2LL * 2 * 4 * (int64_t)h.K * h.N_c * h.N_r * h.N_t;  // H_d + H_u, 2 floats each
    in.seekg((int64_t)in.tellg() + (int64_t)first * per_sample);
    std::vector<ChannelSample> out;
    out.reserve((size_t)count);
    for (int i = 0; i < count; ++i) {
        ChannelSample s;
        s.seed = h.base_seed + (uint64_t)(first + i);
        s.H_d = ComplexGrid({(int)h.K, (int)h.N_c, (int)h.N_r, (int)h.N_t});
        s.H_u = ComplexGrid({(int)h.K, (int)h.N_c, (int)h.N_t, (int)h.N_r});
        read_grid_f32(in, s.H_d);
        read_grid_f32(in, s.H_u);
        if (!in) throw IoError("truncated dataset body in " + path);
        out.push_back(std::move(s));
    }
    return out;
}

uint64_t file_digest(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open file for digest: " + path);
    uint64_t h = 0xcbf29ce484222325ULL;
    char buf[65536];
    while (in) {
        in.read(buf, sizeof(buf));
        h = fnv1a64(buf, (size_t)in.gcount(), h);
    }
    return h;
}

}  // namespace csifb
