#include "clab/archive.hpp"
#include "clab/config.hpp"

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>

using namespace clab;

namespace {

class Archive : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = std::filesystem::temp_directory_path() /
           ("clab_archive_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    std::filesystem::create_directories(dir_);
  }
  void TearDown() override { std::filesystem::remove_all(dir_); }
  std::string path(const std::string& name) const { return (dir_ / name).string(); }

  static CylinderGeometry geometry() {
    CylinderGeometry g;
    g.d_lo = -0.25;
    g.ell = 0.7;
    g.gamma_side = GammaSide::Lo;
    g.nx_prime = 9;
    g.nx_n = 7;
    g.nt = 5;
    return g;
  }

  std::filesystem::path dir_;
};

void expect_same(const ScalarField& a, const ScalarField& b) {
  ASSERT_TRUE(a.same_layout(b));
  EXPECT_TRUE(a.geometry() == b.geometry());
  const auto va = a.values();
  const auto vb = b.values();
  EXPECT_TRUE(std::equal(va.begin(), va.end(), vb.begin(), vb.end()));
}

}  // namespace

TEST_F(Archive, FieldsOfEveryKindRoundTrip) {
  FieldArchive a;
  a.geometry = geometry();
  a.metadata = {{"note", "line one; = sign"}, {"empty", ""}};
  for (FieldKind k : {FieldKind::SpaceTime, FieldKind::SpaceOnly, FieldKind::CrossSectionTime, FieldKind::LateralFace,
                      FieldKind::CrossSection, FieldKind::AxialLine}) {
    a.fields.emplace_back(to_string(k), ScalarField::sample(a.geometry, k, [](double x, double z, double t) {
                            return 1.0 / 3.0 + x - 7.0 * z * t;
                          }));
  }
  write_archive(path("a.clab"), a);
  const FieldArchive b = read_archive(path("a.clab"));
  EXPECT_TRUE(b.geometry == a.geometry);
  EXPECT_EQ(b.metadata, a.metadata);
  ASSERT_EQ(b.fields.size(), a.fields.size());
  for (std::size_t i = 0; i < a.fields.size(); ++i) {
    EXPECT_EQ(b.fields[i].first, a.fields[i].first);
    expect_same(b.fields[i].second, a.fields[i].second);
  }
  EXPECT_THROW(b.field("missing"), ArchiveError);
}

TEST_F(Archive, InstanceRoundTrip) {
  CylinderGeometry g;
  g.nx_prime = g.nx_n = g.nt = 9;
  const ProblemInstance inst = add_noise(make_instance(g, named_recipe("worked")), 0.01, 12345678901234567ull);
  write_instance(path("i.clab"), inst, {{"config_hash", "abc"}});
  const ProblemInstance back = read_instance(path("i.clab"));
  expect_same(back.u, inst.u);
  expect_same(back.y, inst.y);
  expect_same(back.f, inst.f);
  expect_same(back.R, inst.R);
  expect_same(back.p0, inst.p0);
  const auto fa = inst.data.fields();
  const auto fb = back.data.fields();
  ASSERT_EQ(fa.size(), fb.size());
  for (std::size_t i = 0; i < fa.size(); ++i) expect_same(*fb[i].second, *fa[i].second);
  EXPECT_EQ(back.D_of_u, inst.D_of_u);
  EXPECT_EQ(back.M, inst.M);
  EXPECT_EQ(back.data.seed, inst.data.seed);
  EXPECT_EQ(back.data.noise_level, inst.data.noise_level);
  EXPECT_EQ(back.provenance, inst.provenance);
  EXPECT_EQ(read_archive(path("i.clab")).metadata.at("config_hash"), "abc");
}

TEST_F(Archive, RewriteIsByteIdentical) {
  CylinderGeometry g;
  g.nx_prime = g.nx_n = g.nt = 5;
  const ProblemInstance inst = make_instance(g, named_recipe("quartic"));
  write_instance(path("a.clab"), inst);
  write_instance(path("b.clab"), read_instance(path("a.clab")));
  std::ifstream a(path("a.clab"), std::ios::binary), b(path("b.clab"), std::ios::binary);
  const std::string sa((std::istreambuf_iterator<char>(a)), {});
  const std::string sb((std::istreambuf_iterator<char>(b)), {});
  EXPECT_EQ(sa, sb);
  EXPECT_EQ(sa.substr(0, 7), "CLABARC");
}

TEST_F(Archive, CorruptFilesRejected) {
  FieldArchive a;
  a.geometry = geometry();
  a.fields.emplace_back("f", ScalarField(a.geometry, FieldKind::SpaceTime));
  write_archive(path("ok.clab"), a);
  std::ifstream is(path("ok.clab"), std::ios::binary);
  const std::string bytes((std::istreambuf_iterator<char>(is)), {});

  auto write_bytes = [&](const std::string& name, const std::string& data) {
    std::ofstream os(path(name), std::ios::binary);
    os.write(data.data(), static_cast<std::streamsize>(data.size()));
    return path(name);
  };
  EXPECT_THROW(read_archive(write_bytes("trunc.clab", bytes.substr(0, bytes.size() - 3))), ArchiveError);
  EXPECT_THROW(read_archive(write_bytes("tail.clab", bytes + "x")), ArchiveError);
  std::string bad = bytes;
  bad[0] = 'X';
  EXPECT_THROW(read_archive(write_bytes("magic.clab", bad)), ArchiveError);
  EXPECT_THROW(read_archive(write_bytes("empty.clab", "")), ArchiveError);
  EXPECT_THROW(read_archive(path("missing.clab")), ArchiveError);
  EXPECT_THROW(write_archive(path("no/dir/x.clab"), a), ArchiveError);
}

TEST_F(Archive, FieldOnForeignGeometryRejected) {
  FieldArchive a;
  a.geometry = geometry();
  CylinderGeometry other = geometry();
  other.nt = 9;
  a.fields.emplace_back("f", ScalarField(other, FieldKind::SpaceTime));
  EXPECT_THROW(write_archive(path("x.clab"), a), ArchiveError);
}
