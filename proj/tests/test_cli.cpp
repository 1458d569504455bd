#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <vector>

namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  explicit TempDir(const char* name) : path(fs::temp_directory_path() / name) {
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

int run(const std::string& args) {
  const std::string cmd = std::string(BLIP_CLI_PATH) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

void write(const fs::path& p, const std::string& text) {
  std::ofstream(p) << text;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

const char* kTinyRun = R"({
  "experiment": "single_run", "seed": 4,
  "phantom": {"kind": "concentric", "dims": [16, 16]},
  "excitation": {"length": 24},
  "dictionary": {"t1": [[200, 2000, 200]], "t2": [[20, 200, 30]], "df": [[0, 0, 0]]},
  "sampling": {"p": 4},
  "recon": {"max_iters": 20}
})";

}  // namespace

TEST(Cli, UsageErrors) {
  TempDir dir("blip_cli_usage");
  EXPECT_EQ(run(""), 1);
  EXPECT_EQ(run("frobnicate"), 1);
  EXPECT_EQ(run("run"), 1);
  EXPECT_EQ(run("run --config " + (dir.path / "missing.json").string()), 1);
  EXPECT_EQ(run("--help"), 0);
}

TEST(Cli, MalformedConfigWritesNothing) {
  TempDir dir("blip_cli_bad");
  write(dir.path / "bad.json", R"({"experiment": "scaling_study", "study": {"lengths": [50]}})");
  EXPECT_EQ(run("study --config " + (dir.path / "bad.json").string() + " --out " +
                (dir.path / "out").string()),
            1);
  EXPECT_FALSE(fs::exists(dir.path / "out"));
  write(dir.path / "bad2.json", "{ not json");
  EXPECT_EQ(run("run --config " + (dir.path / "bad2.json").string() + " --out " +
                (dir.path / "out").string()),
            1);
  EXPECT_FALSE(fs::exists(dir.path / "out"));
}

TEST(Cli, VerbMustMatchExperimentKind) {
  TempDir dir("blip_cli_kind");
  write(dir.path / "c.json", kTinyRun);
  EXPECT_EQ(run("study --config " + (dir.path / "c.json").string() + " --out " + (dir.path / "o").string()), 1);
}

TEST(Cli, RuntimeFailureExitsTwo) {
  TempDir dir("blip_cli_rt");
  write(dir.path / "phantom.txt", "# blip phantom v1\ndims 2 2\ntissues 1\n1 500 50 0 1\nlabels\n1 1\n1 9\n");
  write(dir.path / "c.json", R"({"experiment": "single_run", "phantom": {"kind": "file", "file": ")" +
                                 (dir.path / "phantom.txt").string() + R"("}, "sampling": {"p": 1}})");
  EXPECT_EQ(run("run --config " + (dir.path / "c.json").string() + " --out " + (dir.path / "o").string()), 2);
}

TEST(Cli, RunIsByteIdenticalAcrossRerunsAndThreads) {
  TempDir dir("blip_cli_det");
  write(dir.path / "c.json", kTinyRun);
  const auto cfg = (dir.path / "c.json").string();
  ASSERT_EQ(run("run --config " + cfg + " --out " + (dir.path / "a").string() + " --threads 1"), 0);
  ASSERT_EQ(run("run --config " + cfg + " --out " + (dir.path / "b").string() + " --threads 3"), 0);
  ASSERT_EQ(run("run --config " + cfg + " --out " + (dir.path / "c").string()), 0);
  std::size_t files = 0;
  for (const auto& e : fs::directory_iterator(dir.path / "a")) {
    const auto name = e.path().filename();
    EXPECT_EQ(slurp(e.path()), slurp(dir.path / "b" / name)) << name;
    EXPECT_EQ(slurp(e.path()), slurp(dir.path / "c" / name)) << name;
    ++files;
  }
  EXPECT_EQ(files, 4u + 3u * 2u + 3u * 3u);
  EXPECT_NE(slurp(dir.path / "a" / "summary.txt").find("config_hash = "), std::string::npos);
}

TEST(Cli, SeedOverrideChangesOutput) {
  TempDir dir("blip_cli_seed");
  write(dir.path / "c.json", kTinyRun);
  const auto cfg = (dir.path / "c.json").string();
  ASSERT_EQ(run("run --no-rasters --config " + cfg + " --out " + (dir.path / "a").string()), 0);
  ASSERT_EQ(run("run --no-rasters --config " + cfg + " --out " + (dir.path / "b").string() + " --seed 5"), 0);
  EXPECT_NE(slurp(dir.path / "a" / "summary.txt"), slurp(dir.path / "b" / "summary.txt"));
}

TEST(Cli, FullSamplingStudyRowAtPrecisionCeiling) {
  TempDir dir("blip_cli_study");
  write(dir.path / "c.json", R"({
    "experiment": "scaling_study", "seed": 2,
    "phantom": {"kind": "concentric", "dims": [8, 8],
                "tissues": [{"label": 1, "t1": 400, "t2": 80, "rho": 0.9},
                            {"label": 2, "t1": 1000, "t2": 50, "rho": 0.7}]},
    "dictionary": {"t1": [[200, 2000, 200]], "t2": [[20, 200, 30]], "df": [[0, 0, 0]]},
    "study": {"lengths": [50], "factors": [1]}
  })");
  ASSERT_EQ(run("study --config " + (dir.path / "c.json").string() + " --out " + (dir.path / "o").string()), 0);
  std::ifstream in(dir.path / "o" / "study.csv");
  std::string line;
  std::vector<std::string> rows;
  while (std::getline(in, line))
    if (!line.empty() && line[0] != '#' && line[0] != 'L') rows.push_back(line);
  ASSERT_EQ(rows.size(), 1u);
  ASSERT_EQ(rows[0].rfind("50,1,50,", 0), 0u) << rows[0];
  const auto tail = rows[0].substr(8);
  EXPECT_GE(std::stod(tail.substr(0, tail.find(','))), 250.0);
  EXPECT_EQ(tail.substr(tail.find(',')), ",0");
}

TEST(Cli, AuxiliaryVerbs) {
  TempDir dir("blip_cli_aux");
  write(dir.path / "c.json", kTinyRun);
  const auto cfg = (dir.path / "c.json").string();
  EXPECT_EQ(run("dict-build --config " + cfg + " --out " + (dir.path / "d").string()), 0);
  EXPECT_TRUE(fs::exists(dir.path / "d" / "dictionary.bin"));
  EXPECT_EQ(run("phantom-gen --config " + cfg + " --out " + (dir.path / "p").string()), 0);
  EXPECT_TRUE(fs::exists(dir.path / "p" / "phantom.txt"));
  EXPECT_TRUE(fs::exists(dir.path / "p" / "truth_t1.pgm"));
  write(dir.path / "f.json", R"({"experiment": "flatness", "seed": 1,
    "dictionary": {"t1": [[200, 2000, 200]], "t2": [[20, 200, 30]], "df": [[0, 0, 0]]},
    "flatness": {"lengths": [20, 40], "num_chords": 50}})");
  EXPECT_EQ(run("flatness --config " + (dir.path / "f.json").string() + " --out " + (dir.path / "f").string()), 0);
  const auto csv = slurp(dir.path / "f" / "flatness.csv");
  EXPECT_NE(csv.find("\n20,"), std::string::npos);
  EXPECT_NE(csv.find("\n40,"), std::string::npos);
}
