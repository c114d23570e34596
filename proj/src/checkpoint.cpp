#include "scarcegan/checkpoint.hpp"

#include <cstring>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace scarcegan {

namespace {

constexpr char kMagic[4] = {'S', 'G', 'A', 'N'};
constexpr std::uint32_t kVersion = 1;

void write_u32(std::ostream& os, std::uint32_t v) { os.write(reinterpret_cast<const char*>(&v), 4); }
void write_u64(std::ostream& os, std::uint64_t v) { os.write(reinterpret_cast<const char*>(&v), 8); }
void write_f64(std::ostream& os, double v) {
    std::uint64_t bits;
    std::memcpy(&bits, &v, 8);
    write_u64(os, bits);
}
void write_str(std::ostream& os, const std::string& s) {
    write_u64(os, s.size());
    os.write(s.data(), static_cast<std::streamsize>(s.size()));
}
void write_vec(std::ostream& os, const std::vector<double>& v) {
    write_u64(os, v.size());
    for (double x : v) write_f64(os, x);
}

std::uint32_t read_u32(std::istream& is) {
    std::uint32_t v;
    is.read(reinterpret_cast<char*>(&v), 4);
    if (!is) throw std::runtime_error("checkpoint: truncated file");
    return v;
}
std::uint64_t read_u64(std::istream& is) {
    std::uint64_t v;
    is.read(reinterpret_cast<char*>(&v), 8);
    if (!is) throw std::runtime_error("checkpoint: truncated file");
    return v;
}
double read_f64(std::istream& is) {
    const std::uint64_t bits = read_u64(is);
    double v;
    std::memcpy(&v, &bits, 8);
    return v;
}
std::string read_str(std::istream& is) {
    const std::uint64_t n = read_u64(is);
    std::string s(n, '\0');
    is.read(s.data(), static_cast<std::streamsize>(n));
    if (!is) throw std::runtime_error("checkpoint: truncated file");
    return s;
}
std::vector<double> read_vec(std::istream& is) {
    const std::uint64_t n = read_u64(is);
    std::vector<double> v(n);
    for (std::uint64_t i = 0; i < n; ++i) v[i] = read_f64(is);
    return v;
}

void write_dense(std::ostream& os, const DenseLayer& l) {
    write_u64(os, l.in_width());
    write_u64(os, l.out_width());
    write_str(os, activation_name(l.activation()));
    write_f64(os, l.leaky_slope());
    for (double w : l.weights.data) write_f64(os, w);
    write_vec(os, l.bias);
}

DenseLayer read_dense(std::istream& is) {
    const std::uint64_t in = read_u64(is);
    const std::uint64_t out = read_u64(is);
    const Activation act = activation_from_name(read_str(is));
    const double slope = read_f64(is);
    DenseLayer l(in, out, act, slope);
    for (double& w : l.weights.data) w = read_f64(is);
    l.bias = read_vec(is);
    return l;
}

void write_bn(std::ostream& os, const BatchNorm& bn) {
    write_u64(os, bn.width());
    write_f64(os, bn.momentum());
    write_f64(os, bn.epsilon());
    write_vec(os, bn.gamma);
    write_vec(os, bn.beta);
    write_vec(os, bn.running_mean);
    write_vec(os, bn.running_var);
}

BatchNorm read_bn(std::istream& is) {
    const std::uint64_t w = read_u64(is);
    const double momentum = read_f64(is);
    const double eps = read_f64(is);
    BatchNorm bn(w, momentum, eps);
    bn.gamma = read_vec(is);
    bn.beta = read_vec(is);
    bn.running_mean = read_vec(is);
    bn.running_var = read_vec(is);
    return bn;
}

void write_adam(std::ostream& os, const AdamState& a) {
    write_f64(os, a.beta1);
    write_f64(os, a.beta2);
    write_f64(os, a.epsilon);
    write_u64(os, a.step);
    write_u64(os, a.m.size());
    for (std::size_t i = 0; i < a.m.size(); ++i) {
        write_vec(os, a.m[i]);
        write_vec(os, a.v[i]);
    }
}

AdamState read_adam(std::istream& is) {
    AdamState a;
    a.beta1 = read_f64(is);
    a.beta2 = read_f64(is);
    a.epsilon = read_f64(is);
    a.step = read_u64(is);
    const std::uint64_t n = read_u64(is);
    a.m.resize(n);
    a.v.resize(n);
    for (std::uint64_t i = 0; i < n; ++i) {
        a.m[i] = read_vec(is);
        a.v[i] = read_vec(is);
    }
    return a;
}

}  // namespace

void save_checkpoint(const std::string& path, const Checkpoint& ck) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("checkpoint: cannot open " + path + " for writing");
    os.write(kMagic, 4);
    write_u32(os, kVersion);

    // model header: head widths, tap index, class-name ordering
    const ClassLayout& layout = ck.disc.layout();
    write_u32(os, static_cast<std::uint32_t>(layout.size()));
    write_u32(os, kUnsupClasses);
    write_u64(os, ck.disc.tap_index());
    std::string names;
    for (std::size_t i = 0; i < layout.names.size(); ++i) {
        if (i) names += ",";
        names += layout.names[i];
    }
    names += "|K,U,F";
    write_str(os, names);

    write_u32(os, static_cast<std::uint32_t>(ck.disc.base().size()));
    for (const DenseLayer& l : ck.disc.base()) write_dense(os, l);
    write_dense(os, ck.disc.sup_head());
    write_dense(os, ck.disc.unsup_head());

    write_u32(os, ck.gen ? 1 : 0);
    if (ck.gen) {
        write_dense(os, ck.gen->fc1());
        write_bn(os, ck.gen->bn());
        write_dense(os, ck.gen->fc2());
    }

    write_u32(os, ck.disc_adam ? 1 : 0);
    if (ck.disc_adam) write_adam(os, *ck.disc_adam);
    write_u32(os, ck.gen_adam ? 1 : 0);
    if (ck.gen_adam) write_adam(os, *ck.gen_adam);

    write_u64(os, ck.step);
    write_str(os, ck.rng_state);
    if (!os) throw std::runtime_error("checkpoint: write failed for " + path);
}

Checkpoint load_checkpoint(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("checkpoint: cannot open " + path);
    char magic[4];
    is.read(magic, 4);
    if (!is || std::memcmp(magic, kMagic, 4) != 0) {
        throw std::runtime_error("checkpoint: bad magic in " + path);
    }
    const std::uint32_t version = read_u32(is);
    if (version != kVersion) {
        throw std::runtime_error("checkpoint: unsupported version " + std::to_string(version));
    }

    const std::uint32_t n_sup = read_u32(is);
    read_u32(is);  // unsup head width, fixed
    const std::uint64_t tap = read_u64(is);
    const std::string names = read_str(is);

    ClassLayout layout;
    const std::string sup_names = names.substr(0, names.find('|'));
    std::size_t pos = 0;
    while (pos <= sup_names.size()) {
        const std::size_t comma = sup_names.find(',', pos);
        if (comma == std::string::npos) {
            layout.names.push_back(sup_names.substr(pos));
            break;
        }
        layout.names.push_back(sup_names.substr(pos, comma - pos));
        pos = comma + 1;
    }
    if (layout.size() != n_sup) throw std::runtime_error("checkpoint: class name count mismatch");

    const std::uint32_t base_count = read_u32(is);
    std::vector<DenseLayer> base;
    base.reserve(base_count);
    std::vector<std::size_t> widths;
    for (std::uint32_t i = 0; i < base_count; ++i) {
        base.push_back(read_dense(is));
        widths.push_back(base.back().out_width());
    }
    if (base.empty()) throw std::runtime_error("checkpoint: no base layers");

    Checkpoint ck;
    ck.disc = Discriminator(base.front().in_width(), widths, layout, tap);
    for (std::uint32_t i = 0; i < base_count; ++i) ck.disc.base()[i] = base[i];
    ck.disc.sup_head() = read_dense(is);
    ck.disc.unsup_head() = read_dense(is);

    if (read_u32(is)) {
        DenseLayer fc1 = read_dense(is);
        BatchNorm bn = read_bn(is);
        DenseLayer fc2 = read_dense(is);
        Generator g(fc1.in_width(), fc1.out_width(), fc2.out_width());
        g.fc1() = fc1;
        g.bn() = bn;
        g.fc2() = fc2;
        ck.gen = g;
    }
    if (read_u32(is)) ck.disc_adam = read_adam(is);
    if (read_u32(is)) ck.gen_adam = read_adam(is);
    ck.step = read_u64(is);
    ck.rng_state = read_str(is);
    return ck;
}

}  // namespace scarcegan
