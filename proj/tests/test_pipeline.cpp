#include <doctest.h>

#include <fstream>
#include <sstream>

#include "homog/pipeline.hpp"

using namespace homog;
namespace fs = std::filesystem;

namespace {

RunConfig small_config(const fs::path& out) {
  return parse_config(nlohmann::json{
      {"coefficient", {{"name", "trig_product"}}},
      {"dim", 1},
      {"coupling", {{"gamma", 2.0}, {"epsilons", {0.25, 0.125, 0.0625}}}},
      {"cell", {{"n", 64}, {"n_y", 64}}},
      {"output", out.string()},
  });
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

bool has_error(const std::vector<ConfigIssue>& issues, const std::string& text) {
  for (const auto& i : issues)
    if (!i.warning && i.message.find(text) != std::string::npos) return true;
  return false;
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("homog_test_" + name);
  fs::remove_all(p);
  return p;
}

}  // namespace

TEST_CASE("config validation") {
  RunConfig c = small_config("out");
  CHECK(validate_config(c).empty());

  RunConfig g = c;
  g.gamma = 0.5;
  CHECK(has_error(validate_config(g), "does not vanish"));

  RunConfig order = c;
  order.epsilons = {0.125, 0.25, 0.0625};
  CHECK(has_error(validate_config(order), "decreasing"));

  RunConfig coarse = c;
  coarse.mesh = {16, 32, 64};
  const auto issues = validate_config(coarse);
  CHECK_FALSE(issues.empty());
  for (const auto& i : issues) CHECK(i.warning);

  RunConfig table = c;
  table.deltas = {0.1, 0.1, 0.1};
  CHECK(has_error(validate_config(table), "does not vanish"));

  RunConfig two_d = c;
  two_d.dim = 2;
  CHECK(has_error(validate_config(two_d), "quadrature"));

  CHECK_THROWS_AS(parse_config(nlohmann::json{{"epsilon", {0.1}}}), ConfigError);
  CHECK_THROWS_AS(parse_config(nlohmann::json{{"dim", "one"}}), ConfigError);
  CHECK(config_hash(c) == config_hash(small_config("elsewhere")));
  CHECK(config_hash(c) != config_hash(g));
}

TEST_CASE("records CSV round trip") {
  ErrorRecord r;
  r.epsilon = 0.1;
  r.delta = 0.01;
  r.tau = 0.1;
  r.mesh = 1024;
  r.l2_error = 1.0 / 3.0;
  r.h1_error = 2.0 / 7.0;
  r.boundary_grad = 1e-17;
  r.residual_dual_norm = 0.123456789012345678;
  r.f_norm = std::sqrt(0.5);
  r.k_norm = 4e-5;
  const auto back = parse_records_csv(records_csv({r, r}));
  REQUIRE(back.size() == 2);
  CHECK(back[1].l2_error == r.l2_error);
  CHECK(back[1].residual_dual_norm == r.residual_dual_norm);
  CHECK(back[1].mesh == r.mesh);
  CHECK(records_csv(back) == records_csv({r, r}));
  CHECK_THROWS_AS(parse_records_csv("epsilon = eps,delta = delta\n1,2,3\n"), InputError);
}

TEST_CASE("pipeline output is deterministic and idempotent") {
  const fs::path a = scratch("a"), b = scratch("b");
  const auto ra = run_pipeline(small_config(a));
  CHECK(ra.failures.empty());
  CHECK(ra.fitted);
  for (const char* f : {"records.csv", "report.json", "rates_l2.svg", "rates_h1.svg"}) CHECK(fs::exists(ra.directory / f));
  CHECK(fs::exists(ra.directory / "fields" / "eps_00" / "fields.csv"));
  CHECK(ra.a0(0, 0) == doctest::Approx(3.0).epsilon(1e-6));

  const auto rb = run_pipeline(small_config(b));
  CHECK(slurp(ra.directory / "records.csv") == slurp(rb.directory / "records.csv"));
  CHECK(slurp(ra.directory / "fields" / "eps_02" / "fields.csv") == slurp(rb.directory / "fields" / "eps_02" / "fields.csv"));

  std::vector<std::pair<fs::path, std::string>> before;
  for (const auto& e : fs::recursive_directory_iterator(ra.directory))
    if (e.is_regular_file()) before.emplace_back(e.path(), slurp(e.path()));
  run_pipeline(small_config(a));
  for (const auto& [p, text] : before) CHECK(slurp(p) == text);
  fs::remove_all(a);
  fs::remove_all(b);
}

TEST_CASE("constant coefficients give errors at the noise floor") {
  const fs::path out = scratch("const");
  RunConfig c = small_config(out);
  c.coefficient = "constant";
  c.fine_solver = "fem";
  c.cell_n = 8;
  c.cell_n_y = 4;
  c.l2_slope = SlopeWindow{0.9, 1.1};
  const auto r = run_pipeline(c);
  REQUIRE(r.fitted);
  for (const auto& f : r.report.fits) CHECK(f.noise_floor);
  REQUIRE(r.criteria.size() == 1);
  CHECK_FALSE(r.criteria[0].pass);
  fs::remove_all(out);
}

TEST_CASE("invalid configs are rejected before any work") {
  RunConfig c = small_config(scratch("bad"));
  c.gamma = 1.0;
  CHECK_THROWS_AS(run_pipeline(c), ConfigError);
  CHECK_FALSE(fs::exists(c.output));
}
