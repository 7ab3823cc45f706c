#include "gridloc/checkpoint.hpp"

#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>

namespace gridloc {

namespace {

constexpr std::uint32_t kVersion = 1;

template <typename T>
void put(std::ostream& out, T v) {
    out.write(reinterpret_cast<const char*>(&v), sizeof v);
}

void put_string(std::ostream& out, const std::string& s) {
    put<std::uint32_t>(out, static_cast<std::uint32_t>(s.size()));
    out.write(s.data(), static_cast<std::streamsize>(s.size()));
}

void put_vector(std::ostream& out, const RealVector& v) {
    put<std::uint64_t>(out, static_cast<std::uint64_t>(v.size()));
    out.write(reinterpret_cast<const char*>(v.data()), static_cast<std::streamsize>(v.size() * sizeof(double)));
}

template <typename T>
T get(std::istream& in) {
    T v{};
    if (!in.read(reinterpret_cast<char*>(&v), sizeof v)) throw InputError("truncated checkpoint");
    return v;
}

std::string get_string(std::istream& in) {
    std::string s(get<std::uint32_t>(in), '\0');
    if (!in.read(s.data(), static_cast<std::streamsize>(s.size()))) throw InputError("truncated checkpoint");
    return s;
}

RealVector get_vector(std::istream& in) {
    const auto n = get<std::uint64_t>(in);
    if (n > (std::uint64_t{1} << 32)) throw InputError("implausible vector length in checkpoint");
    RealVector v(static_cast<Eigen::Index>(n));
    if (!in.read(reinterpret_cast<char*>(v.data()), static_cast<std::streamsize>(n * sizeof(double)))) {
        throw InputError("truncated checkpoint");
    }
    return v;
}

}  // namespace

void write_checkpoint(std::ostream& out, const Checkpoint& ck) {
    const auto& a = ck.params.arch();
    out.write("GLCK", 4);
    put(out, kVersion);
    for (int v : {a.bus_count, a.line_count, a.channels, a.kernel, a.hidden}) put<std::int32_t>(out, v);
    put<std::uint64_t>(out, ck.step);
    put_string(out, ck.config_digest);
    put_string(out, ck.rng_state);
    put_vector(out, ck.params.values());
    put<double>(out, ck.optimizer.learning_rate);
    put<double>(out, ck.optimizer.decay);
    put<double>(out, ck.optimizer.epsilon);
    put_vector(out, ck.optimizer.mean_square);
    put_vector(out, ck.scaler.mean);
    put_vector(out, ck.scaler.scale);
}

Checkpoint read_checkpoint(std::istream& in) {
    char magic[4];
    if (!in.read(magic, 4) || std::memcmp(magic, "GLCK", 4) != 0) throw InputError("not a gridloc checkpoint");
    if (get<std::uint32_t>(in) != kVersion) throw InputError("unsupported checkpoint version");
    Architecture a;
    a.bus_count = get<std::int32_t>(in);
    a.line_count = get<std::int32_t>(in);
    a.channels = get<std::int32_t>(in);
    a.kernel = get<std::int32_t>(in);
    a.hidden = get<std::int32_t>(in);
    Checkpoint ck;
    ck.params = ModelParams(a);
    ck.step = get<std::uint64_t>(in);
    ck.config_digest = get_string(in);
    ck.rng_state = get_string(in);
    RealVector values = get_vector(in);
    if (values.size() != ck.params.values().size()) throw InputError("checkpoint parameter count mismatch");
    ck.params.values() = std::move(values);
    ck.optimizer.learning_rate = get<double>(in);
    ck.optimizer.decay = get<double>(in);
    ck.optimizer.epsilon = get<double>(in);
    ck.optimizer.mean_square = get_vector(in);
    ck.scaler.mean = get_vector(in);
    ck.scaler.scale = get_vector(in);
    return ck;
}

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& checkpoint) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw InputError("cannot write checkpoint " + path.string());
    write_checkpoint(out, checkpoint);
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DependencyError("cannot read checkpoint " + path.string());
    return read_checkpoint(in);
}

}  // namespace gridloc
