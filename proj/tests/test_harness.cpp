#include <catch2/catch.hpp>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "frkn/harness.hpp"

TEST_CASE("method names round-trip") {
  for (auto m : {frkn::Method::FRKN2G, frkn::Method::RKN2G, frkn::Method::FRKN2,
                 frkn::Method::FRKN2x, frkn::Method::RKN2, frkn::Method::RKN2x}) {
    CHECK(frkn::parse_method(frkn::method_name(m)) == m);
  }
  CHECK_THROWS_AS(frkn::parse_method("FRKN9"), frkn::InvalidInput);
}

TEST_CASE("method definitions carry the right basis, nodes and variant") {
  auto g = frkn::make_method(frkn::Method::FRKN2G);
  CHECK(g.basis.fitting_frequency() == 1.0);
  CHECK(g.nodes[0] == Approx(0.5 - std::sqrt(3.0) / 6.0));
  CHECK(g.variant == frkn::DerivativeUpdate::standard);

  auto x = frkn::make_method(frkn::Method::RKN2x);
  CHECK_FALSE(x.basis.fitting_frequency().has_value());
  CHECK(x.nodes[0] == Approx(0.2));
  CHECK(x.nodes[1] == Approx(1.0));
  CHECK(x.variant == frkn::DerivativeUpdate::extended);
}

TEST_CASE("error table rows carry per-halving orders") {
  const double hs[] = {0.125, 0.0625, 0.03125};
  auto t = frkn::run_error_table(frkn::Method::FRKN2G, 0.5, hs);
  REQUIRE(t.rows.size() == 3);
  CHECK(std::isnan(t.rows[0].order1));
  // asymptotic cells sit close to the printed table values
  CHECK(t.rows[0].dy1 == Approx(-3.0069).margin(0.25));
  CHECK(t.rows[1].dy1 == Approx(-4.1495).margin(0.1));
  CHECK(t.rows[2].dy1 == Approx(-5.3323).margin(0.05));
  CHECK(t.rows[2].order1 == Approx(4.0).margin(0.5));

  auto est = frkn::empirical_order(t);
  CHECK(est.order1 == Approx(4.0).margin(0.5));
  CHECK(est.order2 == Approx(4.0).margin(0.5));
}

TEST_CASE("empirical_order is exact on synthetic power-law data") {
  frkn::ErrorTable t;
  t.method_label = "synthetic";
  for (int k = 1; k <= 6; ++k) {
    frkn::ErrorRow r;
    r.h = std::pow(2.0, -k);
    r.dy1 = 3.0 * std::log10(r.h) + 0.7;  // order 3
    r.dy2 = 2.0 * std::log10(r.h) - 0.2;  // order 2
    t.rows.push_back(r);
  }
  auto est = frkn::empirical_order(t);
  CHECK(est.order1 == Approx(3.0).epsilon(1e-12));
  CHECK(est.order2 == Approx(2.0).epsilon(1e-12));

  frkn::ErrorTable tiny;
  tiny.rows.resize(2);
  CHECK_THROWS_AS(frkn::empirical_order(tiny), frkn::InsufficientRows);
}

TEST_CASE("table CSV and JSON carry the declared fields") {
  const double hs[] = {0.25, 0.125, 0.0625};
  auto t = frkn::run_error_table(frkn::Method::RKN2, 0.5, hs);
  std::ostringstream os;
  frkn::write_error_table_csv(os, t);
  const std::string csv = os.str();
  CHECK(csv.rfind("h,dy1,dy2,order1,order2\n", 0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 4);

  const std::string json = frkn::error_table_to_json(t);
  CHECK(json.find("\"method\":\"RKN2\"") != std::string::npos);
  CHECK(json.find("\"rows\":[") != std::string::npos);
  CHECK(json.find("\"order1\":") != std::string::npos);
  // strict JSON: the first row's undefined orders serialize as null
  CHECK(json.find("\"order1\":null") != std::string::npos);
  CHECK(json.find("nan") == std::string::npos);

  CHECK(frkn::error_table_filename(t) == "RKN2_e0.5.csv");
}

TEST_CASE("emit_region_data writes the stability CSV") {
  const std::string path = "region_test_out.csv";
  frkn::emit_region_data(frkn::Method::FRKN2G, {M_PI / 2.0}, {-1.0, -2.0, -3.0}, path);
  std::ifstream is(path);
  REQUIRE(is);
  std::string header;
  std::getline(is, header);
  CHECK(header == "nu,z,rho,class");
  int rows = 0;
  std::string line;
  while (std::getline(is, line))
    if (!line.empty()) ++rows;
  CHECK(rows == 3);
  std::remove(path.c_str());

  // empty z grid leaves a header-only file
  frkn::emit_region_data(frkn::Method::FRKN2G, {1.0}, {}, path);
  std::ifstream is2(path);
  std::string all((std::istreambuf_iterator<char>(is2)), std::istreambuf_iterator<char>());
  CHECK(all == "nu,z,rho,class\n");
  std::remove(path.c_str());

  CHECK_THROWS_AS(
      frkn::emit_region_data(frkn::Method::FRKN2G, {1.0}, {-1.0}, "/nonexistent-dir/x.csv"),
      frkn::IoError);
}

TEST_CASE("harness failures carry method and step context") {
  const double hs[] = {1.0};  // stage iteration cannot settle at h = 1 near perihelion
  try {
    frkn::run_error_table(frkn::Method::RKN2G, 0.5, hs);
    FAIL("expected StageNoConvergence");
  } catch (const frkn::StageNoConvergence& e) {
    CHECK(std::string(e.detail()).find("RKN2G") != std::string::npos);
    CHECK(std::string(e.detail()).find("h=1") != std::string::npos);
  }
}
