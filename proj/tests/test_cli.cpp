#include <gtest/gtest.h>

#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "srd/cli.hpp"
#include "srd/config.hpp"
#include "srd/csv.hpp"
#include "srd/errors.hpp"
#include "srd/experiments.hpp"
#include "srd/svg.hpp"

using namespace srd;
namespace fs = std::filesystem;

namespace {

const char* kExampleConfig = R"(# Beta-prior example
model = beta-example
model.delta = 2.5
constraint = ball
constraint.offset = 2
decision.dimension = 1
grid.points = 0; 1; 2; 3; 4
samples = 10000
seed = 2024
)";

class TempDir {
 public:
  TempDir() {
    const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
    path_ = fs::temp_directory_path() / (std::string("srd_") + info->test_suite_name() + "_" + info->name());
    fs::remove_all(path_);
    fs::create_directories(path_);
  }
  ~TempDir() { fs::remove_all(path_); }

  std::string file(const std::string& name) const { return (path_ / name).string(); }
  std::string write(const std::string& name, const std::string& text) const {
    std::ofstream(file(name), std::ios::binary) << text;
    return file(name);
  }

 private:
  fs::path path_;
};

std::string read(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

int run(std::vector<std::string> args, std::string* diag_out = nullptr) {
  args.insert(args.begin(), "srd");
  std::ostringstream diag;
  const int code = run_cli(args, diag);
  if (diag_out) *diag_out = diag.str();
  return code;
}

// Minimal XML well-formedness: balanced, properly nested elements.
bool well_formed_xml(const std::string& doc) {
  std::vector<std::string> stack;
  std::size_t pos = 0;
  bool root_seen = false;
  while ((pos = doc.find('<', pos)) != std::string::npos) {
    const std::size_t end = doc.find('>', pos);
    if (end == std::string::npos) return false;
    const std::string tag = doc.substr(pos + 1, end - pos - 1);
    pos = end + 1;
    if (tag.empty()) return false;
    if (tag[0] == '?' || tag[0] == '!') continue;
    if (tag[0] == '/') {
      if (stack.empty() || stack.back() != tag.substr(1)) return false;
      stack.pop_back();
      continue;
    }
    const std::string name = tag.substr(0, tag.find_first_of(" \n/"));
    if (stack.empty() && root_seen) return false;
    root_seen = true;
    if (tag.back() != '/') stack.push_back(name);
  }
  return root_seen && stack.empty();
}

}  // namespace

TEST(Config, ParsesValuesAndComments) {
  const Config cfg = Config::parse(
      "a = 1  # trailing\n\n  b.c-d = 2.5e-3\nflag = true\nvec = 1, -2, 3.5\nmat = 1, 0; 0.5, 2\nname = hello\n");
  EXPECT_EQ(cfg.get_int("a"), 1);
  EXPECT_DOUBLE_EQ(cfg.get_double("b.c-d"), 2.5e-3);
  EXPECT_TRUE(cfg.get_bool("flag"));
  EXPECT_EQ(cfg.get_vector("vec"), (std::vector<double>{1.0, -2.0, 3.5}));
  EXPECT_EQ(cfg.get_matrix("mat"), (std::vector<std::vector<double>>{{1.0, 0.0}, {0.5, 2.0}}));
  EXPECT_EQ(cfg.get_string("name"), "hello");
  EXPECT_EQ(cfg.get_u64("missing", 9), 9u);
  EXPECT_NO_THROW(cfg.reject_unused());
}

TEST(Config, RejectsMalformedInput) {
  EXPECT_THROW(Config::parse("a = 1\na = 2\n"), ConfigError);
  EXPECT_THROW(Config::parse("just text\n"), ConfigError);
  EXPECT_THROW(Config::parse("bad key = 1\n"), ConfigError);
  EXPECT_THROW(Config::parse("a =\n"), ConfigError);
  const Config cfg = Config::parse("x = 1.5\ny = abc\nz = 1\nb = yes\n");
  EXPECT_THROW(cfg.get_int("x"), ConfigError);
  EXPECT_THROW(cfg.get_double("y"), ConfigError);
  EXPECT_THROW(cfg.get_bool("b"), ConfigError);
  EXPECT_THROW(cfg.get_double("nope"), ConfigError);
  EXPECT_THROW(Config::parse("u = -1\n").get_u64("u"), ConfigError);
  EXPECT_THROW(Config::parse("v = 1,,2\n").get_vector("v"), ConfigError);
}

TEST(Config, UnusedKeysAreRejected) {
  const Config cfg = Config::parse("used = 1\ntypo = 2\n");
  cfg.get_int("used");
  try {
    cfg.reject_unused();
    FAIL() << "expected ConfigError";
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("typo"), std::string::npos);
  }
}

TEST(Csv, ShortestRoundTrip) {
  RngStream rng(1, 0);
  for (int i = 0; i < 10000; ++i) {
    const double v = std::ldexp(rng.uniform() - 0.5, static_cast<int>(rng() % 200) - 100);
    const std::string s = format_double(v);
    EXPECT_EQ(*parse_cell_double(s), v);
  }
  EXPECT_EQ(format_double(0.1), "0.1");
  EXPECT_EQ(format_double(2.0), "2");
  EXPECT_EQ(format_vector({1.5, -2.0}), "1.5;-2");
  EXPECT_THROW(format_double(std::nan("")), NumericalError);
}

TEST(Csv, TableRoundTrip) {
  CsvTable t({"a", "b", "c"});
  t.add_row({"1", "", "0.5;2"});
  t.add_row({"x", "y", "z"});
  const std::string text = t.to_string();
  EXPECT_EQ(text, "a,b,c\n1,,0.5;2\nx,y,z\n");
  const CsvTable back = CsvTable::parse(text);
  EXPECT_EQ(back.header(), t.header());
  EXPECT_EQ(back.rows(), t.rows());
  EXPECT_EQ(back.column("c"), 2u);
  EXPECT_THROW(t.add_row({"only one"}), std::invalid_argument);
  EXPECT_THROW(t.add_row({"1", "2,3", "4"}), std::invalid_argument);
  EXPECT_EQ(parse_cell_vector("0.5;2"), (std::vector<double>{0.5, 2.0}));
  EXPECT_TRUE(parse_cell_vector("").empty());
}

TEST(Svg, SelfContainedAndWellFormed) {
  PlotSeries a{"truth <exact>", "#000", {0, 1, 2}, {0, 0.5, 1}, false, false};
  PlotSeries b{"steps & more", "#00f", {0, 1, 2}, {0, 1, 1}, true, true};
  const std::string svg = render_svg({PlotPanel{"left", "x", "y", {a, b}}, PlotPanel{"right", "x", "y", {a}}});
  EXPECT_TRUE(well_formed_xml(svg));
  EXPECT_EQ(svg.find("href"), std::string::npos);
  EXPECT_NE(svg.find("&lt;exact&gt;"), std::string::npos);
  EXPECT_NE(svg.find("&amp; more"), std::string::npos);
  EXPECT_FALSE(well_formed_xml("<svg><g></svg>"));
}

TEST(Cli, EstimateExampleProducesIncreasingRows) {
  TempDir dir;
  const std::string cfg = dir.write("ex.cfg", kExampleConfig);
  ASSERT_EQ(run({"estimate", "--config", cfg, "--out", dir.file("out.csv")}), 0);
  const std::string text = read(dir.file("out.csv"));
  EXPECT_EQ(text.find('\r'), std::string::npos);
  const CsvTable t = CsvTable::parse(text);
  EXPECT_EQ(t.header(), kResultColumns);
  ASSERT_EQ(t.rows().size(), 5u);
  double prev = -1.0;
  for (const auto& row : t.rows()) {
    const double phi = *parse_cell_double(row[t.column("phi_hat")]);
    EXPECT_GT(phi, prev);
    prev = phi;
    const double truth = *parse_cell_double(row[t.column("phi_true")]);
    const double se = *parse_cell_double(row[t.column("phi_stderr")]);
    EXPECT_LE(std::fabs(phi - truth), 4.0 * se + 1e-12);
    EXPECT_EQ(row[t.column("n")], "10000");
    EXPECT_EQ(row[t.column("seed")], "2024");
    EXPECT_TRUE(row[t.column("naive_hat")].empty());
  }
}

TEST(Cli, CsvValuesRoundTripBitExactly) {
  TempDir dir;
  const std::string cfg = dir.write("ex.cfg", std::string(kExampleConfig) + "naive = true\n");
  ASSERT_EQ(run({"estimate", "--config", cfg, "--out", dir.file("out.csv")}), 0);
  const CsvTable t = CsvTable::parse(read(dir.file("out.csv")));
  for (const auto& row : t.rows()) {
    for (const char* name : {"x", "phi_hat", "phi_stderr", "grad_hat", "grad_stderr", "phi_true", "grad_true",
                                    "naive_hat"}) {
      const std::string& cell = row[t.column(name)];
      EXPECT_EQ(format_vector(parse_cell_vector(cell)), cell) << name;
    }
  }
}

TEST(Cli, DeterministicAcrossRunsAndWorkers) {
  TempDir dir;
  const std::string cfg = dir.write("ex.cfg", kExampleConfig);
  ASSERT_EQ(run({"estimate", "--config", cfg, "--out", dir.file("a.csv"), "--workers", "1"}), 0);
  ASSERT_EQ(run({"estimate", "--config", cfg, "--out", dir.file("b.csv"), "--workers", "1"}), 0);
  ASSERT_EQ(run({"estimate", "--config", cfg, "--out", dir.file("c.csv"), "--workers", "8"}), 0);
  EXPECT_EQ(read(dir.file("a.csv")), read(dir.file("b.csv")));
  EXPECT_EQ(read(dir.file("a.csv")), read(dir.file("c.csv")));
  ASSERT_EQ(run({"estimate", "--config", cfg, "--out", dir.file("d.csv"), "--seed", "5"}), 0);
  EXPECT_NE(read(dir.file("a.csv")), read(dir.file("d.csv")));
}

TEST(Cli, ConfigErrorsExitTwoWithoutOutput) {
  TempDir dir;
  const std::vector<std::string> bad = {
      std::string(kExampleConfig) + "grid.extra = 1\n",
      "model = beta-example\nmodel.delta = 2.5\nconstraint = ball\nconstraint.offset = 2\n"
      "decision.dimension = 1\ngrid.points = 0, 1; 2, 3\nsamples = 10\n",
      "model = beta-example\nmodel.delta = 2.5\nconstraint = halfspace\nconstraint.a = 1, 0, 0\n"
      "constraint.b = 1\nconstraint.beta = 1\ngrid.points = 0\nsamples = 10\n",
      "model = beta-example\nmodel.delta = -1\nconstraint = ball\nconstraint.offset = 2\ngrid.points = 0\nsamples = 10\n",
      "model = gmm\nconstraint = ball\n",
  };
  for (std::size_t i = 0; i < bad.size(); ++i) {
    const std::string cfg = dir.write("bad" + std::to_string(i) + ".cfg", bad[i]);
    std::string diag;
    EXPECT_EQ(run({"estimate", "--config", cfg, "--out", dir.file("out.csv")}, &diag), 2) << bad[i];
    EXPECT_FALSE(fs::exists(dir.file("out.csv"))) << bad[i];
    EXPECT_NE(diag.find("configuration error"), std::string::npos) << diag;
  }
  EXPECT_EQ(run({"estimate", "--config", dir.file("missing.cfg")}), 2);
  EXPECT_EQ(run({"estimate"}), 2);
  EXPECT_EQ(run({"frobnicate", "--config", dir.file("bad0.cfg")}), 2);
  EXPECT_EQ(run({"estimate", "--config", dir.file("bad0.cfg"), "--svg", "x.svg"}), 2);
}

TEST(Cli, SlaterViolationExitsThree) {
  TempDir dir;
  const std::string cfg = dir.write("slater.cfg",
                                    "model = beta-example\nmodel.delta = 2.5\nconstraint = ball\n"
                                    "constraint.offset = 0.5\ngrid.points = 0\nsamples = 1000\n");
  std::string diag;
  EXPECT_EQ(run({"estimate", "--config", cfg, "--out", dir.file("out.csv")}, &diag), 3);
  EXPECT_FALSE(fs::exists(dir.file("out.csv")));
  EXPECT_NE(diag.find("numerical error"), std::string::npos);
}

TEST(Cli, ExecutableExitCodes) {
  TempDir dir;
  const std::string good = dir.write("ex.cfg", kExampleConfig);
  const std::string bad = dir.write("bad.cfg", "model = nothing\n");
  const std::string exe = SRD_CLI_PATH;
  const auto status = [&](const std::string& args) {
    const int raw = std::system((exe + " " + args + " 2>/dev/null").c_str());
    return WEXITSTATUS(raw);
  };
  EXPECT_EQ(status("estimate --config " + good + " --out " + dir.file("o.csv")), 0);
  EXPECT_EQ(status("estimate --config " + bad + " --out " + dir.file("p.csv")), 2);
  EXPECT_FALSE(fs::exists(dir.file("p.csv")));
}

TEST(Cli, GradientCommand) {
  TempDir dir;
  const std::string cfg = dir.write("ex.cfg", kExampleConfig);
  ASSERT_EQ(run({"gradient", "--config", cfg, "--out", dir.file("g.csv")}), 0);
  const CsvTable t = CsvTable::parse(read(dir.file("g.csv")));
  ASSERT_EQ(t.rows().size(), 5u);
  for (const auto& row : t.rows()) {
    const double g = parse_cell_vector(row[t.column("grad_hat")])[0];
    const double fd = parse_cell_vector(row[t.column("grad_fd")])[0];
    const double truth = parse_cell_vector(row[t.column("grad_true")])[0];
    const double se = parse_cell_vector(row[t.column("grad_stderr")])[0];
    EXPECT_NEAR(fd, g, 1e-6 * std::fabs(g) + 1e-9);
    EXPECT_LE(std::fabs(g - truth), 4.0 * se + 1e-12);
  }
}

TEST(Cli, CompareCommand) {
  TempDir dir;
  const std::string never = dir.write("never.cfg",
                                      "model = beta-example\nmodel.delta = 2.5\nconstraint = constant\n"
                                      "constraint.level = -1\ngrid.points = 0; 1\nsamples = 500\n");
  ASSERT_EQ(run({"compare", "--config", never, "--out", dir.file("n.csv")}), 0);
  CsvTable t = CsvTable::parse(read(dir.file("n.csv")));
  for (const auto& row : t.rows()) {
    EXPECT_EQ(row[t.column("spherical_hat")], "1");
    EXPECT_EQ(row[t.column("naive_hat")], "1");
  }

  const std::string cfg = dir.write("ex.cfg", kExampleConfig);
  ASSERT_EQ(run({"compare", "--config", cfg, "--out", dir.file("c.csv")}), 0);
  t = CsvTable::parse(read(dir.file("c.csv")));
  ASSERT_EQ(t.rows().size(), 5u);
  for (const auto& row : t.rows()) {
    EXPECT_EQ(row[t.column("dominance")], "true");
    EXPECT_GT(*parse_cell_double(row[t.column("spherical_sec_per_sample")]), 0.0);
  }
}

TEST(Cli, ConvergenceCommand) {
  TempDir dir;
  const std::string cfg = dir.write("conv.cfg",
                                    "model = beta-example\nmodel.delta = 2.5\nconstraint = ball\n"
                                    "constraint.offset = 2\ngrid.points = 1; 2\nconvergence.sizes = 100, 1000, 10000\n"
                                    "convergence.replications = 40\nseed = 3\n");
  ASSERT_EQ(run({"convergence", "--config", cfg, "--out", dir.file("c.csv")}), 0);
  const CsvTable t = CsvTable::parse(read(dir.file("c.csv")));
  ASSERT_EQ(t.rows().size(), 6u);
  std::vector<double> ns, rmse;
  for (const auto& row : t.rows()) {
    EXPECT_GE(*parse_cell_double(row[t.column("variance_ratio")]), 1.0);
    EXPECT_FALSE(row[t.column("rmse_grad")].empty());
    if (row[t.column("x")] == "2") {
      ns.push_back(*parse_cell_double(row[t.column("n")]));
      rmse.push_back(*parse_cell_double(row[t.column("rmse_phi")]));
    }
  }
  const double slope = loglog_slope(ns, rmse);
  EXPECT_GT(slope, -0.7);
  EXPECT_LT(slope, -0.3);

  const std::string no_oracle = dir.write("none.cfg",
                                          "model = beta-example\nmodel.delta = 2.5\nconstraint = ball\n"
                                          "constraint.offset = 2\ngrid.points = 1\nconvergence.sizes = 100\n"
                                          "convergence.replications = 4\noracle = none\n");
  EXPECT_EQ(run({"convergence", "--config", no_oracle}), 2);
}

TEST(Cli, ReplicateFigure) {
  TempDir dir;
  const std::string cfg = dir.write("fig.cfg",
                                    "model = beta-example\nmodel.delta = 2.5\nconstraint = ball\n"
                                    "constraint.offset = 2\nseed = 11\n");
  ASSERT_EQ(run({"replicate-figure", "--config", cfg, "--out", dir.file("f.csv"), "--svg", dir.file("f.svg")}), 0);
  const CsvTable t = CsvTable::parse(read(dir.file("f.csv")));
  ASSERT_EQ(t.rows().size(), 81u);
  int flat_steps = 0;
  double prev_truth = -1.0, prev_naive = -1.0;
  for (const auto& row : t.rows()) {
    const double truth = *parse_cell_double(row[t.column("phi_true")]);
    const double naive = *parse_cell_double(row[t.column("naive_hat")]);
    EXPECT_GT(truth, prev_truth);
    EXPECT_DOUBLE_EQ(std::round(naive * 100.0) / 100.0, naive);
    if (naive == prev_naive) ++flat_steps;
    prev_truth = truth;
    prev_naive = naive;
  }
  EXPECT_GT(flat_steps, 40);
  const std::string svg = read(dir.file("f.svg"));
  EXPECT_TRUE(well_formed_xml(svg));
  EXPECT_EQ(svg.find("href"), std::string::npos);

  const std::string mixture = dir.write("mix.cfg",
                                        "model = finite-mixture\nmixture.weights = 1\nmixture.0.mean = 0, 0\n"
                                        "mixture.0.chol = 1, 0; 0, 1\nconstraint = ball\nconstraint.offset = 2\n");
  EXPECT_EQ(run({"replicate-figure", "--config", mixture, "--out", dir.file("m.csv")}), 2);
}

TEST(Cli, HalfspaceMixtureAndPlugin) {
  TempDir dir;
  const std::string mix =
      "model = finite-mixture\nmixture.weights = 0.4, 0.6\n"
      "mixture.0.mean = 0.2, -0.1\nmixture.0.chol = 0.9, 0; 0.2, 0.7\n"
      "mixture.1.mean = -0.5, 0.3\nmixture.1.chol = 1.1, 0; -0.3, 0.5\n"
      "grid.points = -0.5, 0; 0.5, 1\nsamples = 20000\n";
  const std::string cfg =
      dir.write("half.cfg", mix + "constraint = halfspace\nconstraint.a = 1, 0.5\nconstraint.b = 0.8, -0.3\n"
                                  "constraint.beta = 1.5\n");
  ASSERT_EQ(run({"estimate", "--config", cfg, "--out", dir.file("h.csv")}), 0);
  CsvTable t = CsvTable::parse(read(dir.file("h.csv")));
  for (const auto& row : t.rows()) {
    const double phi = *parse_cell_double(row[t.column("phi_hat")]);
    EXPECT_LE(std::fabs(phi - *parse_cell_double(row[t.column("phi_true")])),
              4.0 * *parse_cell_double(row[t.column("phi_stderr")]));
  }

  register_constraint_plugin("scaled-halfspace", [](const Config& c, int n, int m) {
    const double k = c.get_double("plugin.scale");
    std::vector<double> a(static_cast<std::size_t>(m), 0.0), b(static_cast<std::size_t>(n), 0.0);
    a[0] = k;
    b[0] = k;
    return halfspace_constraint(a, b, k);
  });
  const std::string plugin = dir.write("plugin.cfg", mix + "constraint = plugin\nconstraint.plugin = scaled-halfspace\n"
                                                           "decision.dimension = 2\nplugin.scale = 2\n");
  ASSERT_EQ(run({"estimate", "--config", plugin, "--out", dir.file("p.csv")}), 0);
  t = CsvTable::parse(read(dir.file("p.csv")));
  EXPECT_EQ(t.rows().size(), 2u);
  // The discrete prior with m = 2 falls back to the reference quadrature.
  for (const auto& row : t.rows()) {
    const double phi = *parse_cell_double(row[t.column("phi_hat")]);
    EXPECT_LE(std::fabs(phi - *parse_cell_double(row[t.column("phi_true")])),
              4.0 * *parse_cell_double(row[t.column("phi_stderr")]));
  }

  const std::string unknown = dir.write("unknown.cfg", mix + "constraint = plugin\nconstraint.plugin = nope\n"
                                                             "decision.dimension = 2\n");
  EXPECT_EQ(run({"estimate", "--config", unknown}), 2);
}

TEST(Cli, ShippedConfigsRun) {
  TempDir dir;
  const std::string root = SRD_CONFIG_DIR;
  const std::vector<std::pair<std::string, std::string>> cases = {
      {"beta_example.cfg", "estimate"},
      {"mixture_halfspace.cfg", "estimate"},
      {"figure.cfg", "replicate-figure"},
      {"convergence.cfg", "convergence"},
  };
  for (const auto& [name, command] : cases) {
    std::string diag;
    EXPECT_EQ(run({command, "--config", root + "/" + name, "--out", dir.file(name + ".csv")}, &diag), 0)
        << name << ": " << diag;
    EXPECT_FALSE(read(dir.file(name + ".csv")).empty()) << name;
  }
}

TEST(Experiments, MixtureConfigMatchesBuiltin) {
  const Experiment ex =
      build_experiment(Command::Estimate, Config::load(std::string(SRD_CONFIG_DIR) + "/mixture_halfspace.cfg"));
  const HalfspaceExample hs = mixture_halfspace_example();
  ASSERT_TRUE(ex.mixture.has_value());
  EXPECT_EQ(ex.mixture->weights, hs.mixture.weights);
  ASSERT_EQ(ex.mixture->components.size(), hs.mixture.components.size());
  for (std::size_t k = 0; k < hs.mixture.components.size(); ++k) {
    EXPECT_EQ(ex.mixture->components[k].mean, hs.mixture.components[k].mean);
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j) EXPECT_EQ(ex.mixture->components[k].chol(i, j), hs.mixture.components[k].chol(i, j));
  }
  EXPECT_EQ(ex.halfspace_a, hs.a);
  EXPECT_EQ(ex.halfspace_b, hs.b);
  EXPECT_EQ(ex.halfspace_beta, hs.beta);
  EXPECT_EQ(ex.oracle, OracleKind::Halfspace);
}
