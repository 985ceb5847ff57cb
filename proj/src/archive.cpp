#include "clab/archive.hpp"

#include "clab/reports.hpp"

#include <array>
#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>

namespace clab {

namespace {

constexpr std::array<char, 8> kMagic{'C', 'L', 'A', 'B', 'A', 'R', 'C', '\x01'};
constexpr std::uint64_t kMaxString = 1u << 26;

class Writer {
 public:
  explicit Writer(std::ostream& os) : os_(os) {}

  void u64(std::uint64_t v) {
    std::array<unsigned char, 8> b{};
    for (int i = 0; i < 8; ++i) b[static_cast<std::size_t>(i)] = static_cast<unsigned char>(v >> (8 * i));
    os_.write(reinterpret_cast<const char*>(b.data()), 8);
  }
  void f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }
  void str(const std::string& s) {
    u64(s.size());
    os_.write(s.data(), static_cast<std::streamsize>(s.size()));
  }

 private:
  std::ostream& os_;
};

class Reader {
 public:
  explicit Reader(std::istream& is) : is_(is) {}

  std::uint64_t u64() {
    std::array<unsigned char, 8> b{};
    is_.read(reinterpret_cast<char*>(b.data()), 8);
    if (!is_) throw ArchiveError("archive truncated");
    std::uint64_t v = 0;
    for (int i = 7; i >= 0; --i) v = (v << 8) | b[static_cast<std::size_t>(i)];
    return v;
  }
  double f64() { return std::bit_cast<double>(u64()); }
  std::string str() {
    const std::uint64_t n = u64();
    if (n > kMaxString) throw ArchiveError("archive string length out of range");
    std::string s(n, '\0');
    is_.read(s.data(), static_cast<std::streamsize>(n));
    if (!is_) throw ArchiveError("archive truncated");
    return s;
  }

 private:
  std::istream& is_;
};

void write_geometry(Writer& w, const CylinderGeometry& g) {
  w.f64(g.d_lo);
  w.f64(g.d_hi);
  w.f64(g.ell);
  w.f64(g.delta);
  w.u64(g.gamma_side == GammaSide::Hi ? 1 : 0);
  w.u64(static_cast<std::uint64_t>(g.nx_prime));
  w.u64(static_cast<std::uint64_t>(g.nx_n));
  w.u64(static_cast<std::uint64_t>(g.nt));
  w.u64(g.extended ? 1 : 0);
}

int read_count(Reader& r) {
  const std::uint64_t n = r.u64();
  if (n > (1u << 20)) throw ArchiveError("archive grid count out of range");
  return static_cast<int>(n);
}

CylinderGeometry read_geometry(Reader& r) {
  CylinderGeometry g;
  g.d_lo = r.f64();
  g.d_hi = r.f64();
  g.ell = r.f64();
  g.delta = r.f64();
  g.gamma_side = r.u64() == 1 ? GammaSide::Hi : GammaSide::Lo;
  g.nx_prime = read_count(r);
  g.nx_n = read_count(r);
  g.nt = read_count(r);
  g.extended = r.u64() == 1;
  try {
    g.validate();
  } catch (const GridError& e) {
    throw ArchiveError(std::string("archive geometry invalid: ") + e.what());
  }
  return g;
}

constexpr std::array<FieldKind, 6> kKinds{FieldKind::SpaceTime,   FieldKind::SpaceOnly,
                                          FieldKind::CrossSectionTime, FieldKind::LateralFace,
                                          FieldKind::CrossSection, FieldKind::AxialLine};

std::uint64_t kind_code(FieldKind k) {
  for (std::size_t i = 0; i < kKinds.size(); ++i) {
    if (kKinds[i] == k) return i;
  }
  throw ArchiveError("unknown field kind");
}

const std::string& meta(const FieldArchive& a, const std::string& key) {
  const auto it = a.metadata.find(key);
  if (it == a.metadata.end()) throw ArchiveError("archive metadata lacks '" + key + "'");
  return it->second;
}

double meta_double(const FieldArchive& a, const std::string& key) {
  try {
    return parse_double(meta(a, key));
  } catch (const std::invalid_argument&) {
    throw ArchiveError("archive metadata '" + key + "' is not a number");
  }
}

}  // namespace

const ScalarField& FieldArchive::field(const std::string& name) const {
  for (const auto& [n, f] : fields) {
    if (n == name) return f;
  }
  throw ArchiveError("archive has no field '" + name + "'");
}

void write_archive(const std::string& path, const FieldArchive& archive) {
  std::ostringstream buf(std::ios::binary);
  Writer w(buf);
  buf.write(kMagic.data(), kMagic.size());
  write_geometry(w, archive.geometry);
  w.u64(archive.metadata.size());
  for (const auto& [k, v] : archive.metadata) {
    w.str(k);
    w.str(v);
  }
  w.u64(archive.fields.size());
  for (const auto& [name, f] : archive.fields) {
    if (!(f.geometry() == archive.geometry)) {
      throw ArchiveError("field '" + name + "' lives on a different geometry than the archive");
    }
    w.str(name);
    w.u64(kind_code(f.kind()));
    for (int a = 0; a < 3; ++a) w.u64(static_cast<std::uint64_t>(f.extent(a)));
    for (double v : f.values()) w.f64(v);
  }
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw ArchiveError("cannot open '" + path + "' for writing");
  const std::string bytes = buf.str();
  os.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!os) throw ArchiveError("write to '" + path + "' failed");
}

FieldArchive read_archive(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw ArchiveError("cannot open '" + path + "'");
  std::array<char, 8> magic{};
  is.read(magic.data(), magic.size());
  if (!is || magic != kMagic) throw ArchiveError("'" + path + "' is not a clab archive");
  Reader r(is);
  FieldArchive a;
  a.geometry = read_geometry(r);
  const std::uint64_t nmeta = r.u64();
  if (nmeta > (1u << 16)) throw ArchiveError("archive metadata count out of range");
  for (std::uint64_t i = 0; i < nmeta; ++i) {
    std::string k = r.str();
    a.metadata[k] = r.str();
  }
  const std::uint64_t nfields = r.u64();
  if (nfields > (1u << 10)) throw ArchiveError("archive field count out of range");
  for (std::uint64_t i = 0; i < nfields; ++i) {
    std::string name = r.str();
    const std::uint64_t code = r.u64();
    if (code >= kKinds.size()) throw ArchiveError("field '" + name + "' has an unknown kind");
    ScalarField f(a.geometry, kKinds[code]);
    for (int ax = 0; ax < 3; ++ax) {
      if (r.u64() != static_cast<std::uint64_t>(f.extent(ax))) {
        throw ArchiveError("field '" + name + "' extents do not match the geometry");
      }
    }
    for (double& v : f.values()) v = r.f64();
    a.fields.emplace_back(std::move(name), std::move(f));
  }
  if (is.peek() != std::ifstream::traits_type::eof()) throw ArchiveError("trailing bytes in archive");
  return a;
}

FieldArchive instance_to_archive(const ProblemInstance& instance) {
  FieldArchive a;
  a.geometry = instance.geometry;
  a.metadata["provenance"] = instance.provenance;
  a.metadata["noise_level"] = format_double(instance.data.noise_level);
  a.metadata["seed"] = std::to_string(instance.data.seed);
  a.metadata["D_of_u"] = format_double(instance.D_of_u);
  a.metadata["M"] = format_double(instance.M);
  a.fields = {{"u", instance.u}, {"y", instance.y}, {"f", instance.f}, {"R", instance.R},
              {"p0", instance.p0}};
  for (const auto& [name, f] : instance.data.fields()) a.fields.emplace_back("data." + name, *f);
  return a;
}

ProblemInstance instance_from_archive(const FieldArchive& a) {
  ProblemInstance inst;
  inst.geometry = a.geometry;
  inst.u = a.field("u");
  inst.y = a.field("y");
  inst.f = a.field("f");
  inst.R = a.field("R");
  inst.p0 = a.field("p0");
  for (auto& [name, f] : inst.data.fields()) *f = a.field("data." + name);
  inst.provenance = meta(a, "provenance");
  inst.data.noise_level = meta_double(a, "noise_level");
  try {
    inst.data.seed = std::stoull(meta(a, "seed"));
  } catch (const std::exception&) {
    throw ArchiveError("archive metadata 'seed' is not an unsigned integer");
  }
  inst.D_of_u = meta_double(a, "D_of_u");
  inst.M = meta_double(a, "M");
  return inst;
}

void write_instance(const std::string& path, const ProblemInstance& instance,
                    const std::map<std::string, std::string>& extra_metadata) {
  FieldArchive a = instance_to_archive(instance);
  for (const auto& [k, v] : extra_metadata) a.metadata.emplace(k, v);
  write_archive(path, a);
}

ProblemInstance read_instance(const std::string& path) { return instance_from_archive(read_archive(path)); }

}  // namespace clab
