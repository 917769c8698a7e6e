#include <gtest/gtest.h>

#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <random>

#include "eldiff/config.hpp"
#include "eldiff/diagnostics.hpp"
#include "eldiff/errors.hpp"
#include "eldiff/io.hpp"

using namespace eldiff;
namespace fs = std::filesystem;

namespace {

const char* kBase = R"(
dim = 2
n = 32
lambdas = [0.2, 0.1, 0.05]   # strictly decreasing
final_time = 0.25
snapshots = 5
z0_offset = 2
z0_modes = [[1, 0, cos, 0.3],
            [0, 2, sin, -0.1]]
v0_modes_x = [[0, 1, sin, 0.05]]
doping_modes = []
)";

fs::path scratch(const std::string& name) {
  auto dir = fs::temp_directory_path() / "eldiff_tests";
  fs::create_directories(dir);
  return dir / name;
}

void expect_config_error(const std::string& text, const std::string& needle) {
  try {
    parse_config(text);
    FAIL() << "accepted: " << text;
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find(needle), std::string::npos) << e.what();
  }
}

}  // namespace

TEST(Config, ParsesValuesAndModes) {
  auto c = parse_config(kBase);
  EXPECT_EQ(c.dim, 2);
  EXPECT_EQ(c.n, 32);
  ASSERT_EQ(c.lambdas.size(), 3u);
  EXPECT_EQ(c.lambdas[2], 0.05);
  EXPECT_EQ(c.z0.offset, 2.0);
  ASSERT_EQ(c.z0.terms.size(), 2u);
  EXPECT_EQ(c.z0.terms[1].mode[1], 2);
  EXPECT_EQ(c.z0.terms[1].kind, TrigKind::Sin);
  EXPECT_EQ(c.z0.terms[1].amplitude, -0.1);
  ASSERT_EQ(c.v0.size(), 2u);
  EXPECT_EQ(c.v0[0].terms.size(), 1u);
  EXPECT_TRUE(c.v0[1].terms.empty());
  EXPECT_TRUE(c.doping.terms.empty());
  EXPECT_EQ(c.dt_policy, DtPolicy::Auto);
  EXPECT_FALSE(c.npns_control().fixed_dt);
}

TEST(Config, CheckedInScenarioLoads) {
  auto c = load_config(fs::path(ELDIFF_SOURCE_DIR) / "configs" / "acceptance.cfg");
  EXPECT_EQ(c.n, 64);
  EXPECT_EQ(c.lambdas.size(), 4u);
  EXPECT_EQ(c.snapshots, 10);
}

TEST(Config, Invariants) {
  std::string t = kBase;
  expect_config_error(std::string(kBase) + "lambdas_extra = 1\n", "unknown key");
  auto replace = [&](const std::string& from, const std::string& to) {
    std::string s = t;
    s.replace(s.find(from), from.size(), to);
    return s;
  };
  expect_config_error(replace("[0.2, 0.1, 0.05]", "[0.1, 0.2, 0.05]"), "strictly decreasing");
  expect_config_error(replace("[0.2, 0.1, 0.05]", "[0.6, 0.1]"), "(0, 0.5]");
  expect_config_error(replace("[0.2, 0.1, 0.05]", "[0.2, 0.0]"), "(0, 0.5]");
  expect_config_error(replace("snapshots = 5", "snapshots = 4"), "snapshots");
  expect_config_error(replace("n = 32", "n = 24"), "power of two");
  expect_config_error(replace("[1, 0, cos, 0.3]", "[1, cos, 0.3]"), "wavenumbers");
  expect_config_error(replace("[1, 0, cos, 0.3]", "[1, 0, tan, 0.3]"), "cos or sin");
  expect_config_error(replace("final_time = 0.25", "final_time = abc"), "not a number");
  expect_config_error(replace("n = 32", "n 32"), "line");
  expect_config_error(std::string(kBase) + "mu = [1, 2\n", "unbalanced");
  expect_config_error(std::string(kBase) + "n = 16\n", "duplicate");
}

TEST(Config, OutputDirectoryOverride) {
  auto path = scratch("override.cfg");
  {
    std::ofstream out(path);
    out << kBase << "output_dir = from_file\n";
  }
  ::unsetenv(kOutputDirEnv);
  EXPECT_EQ(load_config(path).output_dir, fs::path("from_file"));
  ::setenv(kOutputDirEnv, "from_env", 1);
  EXPECT_EQ(load_config(path).output_dir, fs::path("from_env"));
  ::unsetenv(kOutputDirEnv);
  EXPECT_THROW(load_config(scratch("missing.cfg")), ConfigError);
}

TEST(Csv, RoundTripAndHeaderOnly) {
  Table t;
  t.columns = functional_columns();
  EXPECT_EQ(t.columns.size(), 1 + 10u);
  auto path = scratch("empty.csv");
  write_csv(path, t);
  std::ifstream in(path);
  std::string header, extra;
  std::getline(in, header);
  EXPECT_FALSE(static_cast<bool>(std::getline(in, extra)));
  EXPECT_EQ(std::count(header.begin(), header.end(), ',') + 1, static_cast<long>(t.columns.size()));

  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(-1e3, 1e3);
  for (int r = 0; r < 5; ++r) {
    std::vector<double> row(t.columns.size());
    for (auto& x : row) x = u(rng) * std::pow(10.0, r * 7 - 20);
    t.rows.push_back(row);
  }
  path = scratch("rows.csv");
  write_csv(path, t);
  auto back = read_csv(path);
  EXPECT_EQ(back.columns, t.columns);
  ASSERT_EQ(back.rows.size(), t.rows.size());
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    for (std::size_t j = 0; j < t.columns.size(); ++j) EXPECT_EQ(back.rows[i][j], t.rows[i][j]);
  }
}

TEST(Csv, ErrorsNamePath) {
  Table t;
  t.columns = {"a", "b"};
  t.rows = {{1.0}};
  try {
    write_csv(scratch("bad.csv"), t);
    FAIL();
  } catch (const IoError& e) {
    EXPECT_NE(std::string(e.what()).find("bad.csv"), std::string::npos);
  }
  try {
    read_csv(scratch("does_not_exist.csv"));
    FAIL();
  } catch (const IoError& e) {
    EXPECT_NE(std::string(e.what()).find("does_not_exist.csv"), std::string::npos);
  }
}

TEST(Snapshot, RoundTripIsBitExact) {
  auto g = make_grid(2, 16);
  std::mt19937_64 rng(3);
  std::normal_distribution<double> nd;
  std::vector<double> a(g->size()), b(g->size());
  for (auto& x : a) x = nd(rng);
  for (auto& x : b) x = nd(rng) * 1e-300;
  auto fa = ScalarField::from_physical(g, a);
  auto fb = ScalarField::from_physical(g, b);
  auto snap = make_snapshot({{"n", &fa}, {"phi_long_name", &fb}});
  auto path = scratch("snap.bin");
  write_snapshot(path, snap);
  auto back = read_snapshot(path);
  EXPECT_EQ(back.dim, 2);
  EXPECT_EQ(back.n, 16);
  ASSERT_EQ(back.fields.size(), 2u);
  EXPECT_EQ(back.fields[1].name, "phi_long_name");
  for (std::size_t f = 0; f < 2; ++f) {
    EXPECT_EQ(std::memcmp(back.fields[f].values.data(), snap.fields[f].values.data(),
                          snap.fields[f].values.size() * sizeof(double)),
              0);
  }

  std::ifstream raw(path, std::ios::binary);
  char magic[8];
  raw.read(magic, 8);
  EXPECT_EQ(std::string(magic, 8), "ELDSNAP1");
  EXPECT_EQ(fs::file_size(path), 8 + 12 + (4 + 1) + (4 + 13) + 2 * 256 * 8u);
}

TEST(Snapshot, RejectsForeignFiles) {
  auto path = scratch("foreign.bin");
  {
    std::ofstream out(path, std::ios::binary);
    out << "NOTASNAPSHOT";
  }
  EXPECT_THROW(read_snapshot(path), IoError);
}
