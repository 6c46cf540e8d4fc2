#include "support.hpp"

#include <gtest/gtest.h>

using namespace hvf;

TEST(Catalog, EveryEntryReproducesItsFacts) {
  for (const auto& name : catalog_names()) {
    auto e = catalog_get(name);
    EXPECT_FALSE(e.facts.empty()) << name;
    for (const auto& f : verify_facts(e))
      EXPECT_TRUE(f.outcome.pass) << name << "." << f.name << " deviation " << f.outcome.deviation << " "
                                  << f.outcome.detail;
  }
}

TEST(Catalog, ParameterizedEntries) {
  auto u = catalog_get("unimodular", {{"alpha", "3/2"}, {"beta", "-1"}, {"gamma", "0.25"}});
  EXPECT_EQ(u.exact_brackets->c, StructureConstants<Rational>::unimodular(Rational(3, 2), -1, Rational(1, 4)).c);
  for (const auto& f : verify_facts(u)) EXPECT_TRUE(f.outcome.pass) << f.name;
  auto t = catalog_get("hyperbolic-torus", {{"A", "3,2;1,1"}});
  for (const auto& f : verify_facts(t)) EXPECT_TRUE(f.outcome.pass) << f.name;
  auto ft = catalog_get("flat-torus", {{"a", "-3"}});
  for (const auto& f : verify_facts(ft)) EXPECT_TRUE(f.outcome.pass) << f.name;
}

TEST(Catalog, Kinds) {
  EXPECT_EQ(catalog_get("hopf").kind, ModelKind::Frame);
  EXPECT_EQ(catalog_get("hyperbolic-torus").kind, ModelKind::Both);
  EXPECT_EQ(catalog_get("round-sphere").kind, ModelKind::Chart);
  EXPECT_FALSE(catalog_get("hyperbolic-torus").exact_model().has_value());
}

TEST(Catalog, Errors) {
  EXPECT_THROW(catalog_get("klein-bottle"), UnknownModel);
  EXPECT_THROW(catalog_get("flat-torus", {{"a", "0"}}), std::invalid_argument);
  EXPECT_THROW(catalog_get("hyperbolic-torus", {{"A", "1,1;0,1"}}), std::invalid_argument);
  EXPECT_THROW(catalog_get("hyperbolic-torus", {{"A", "2,1;1,2"}}), std::invalid_argument);
  EXPECT_THROW(catalog_get("unimodular", {{"alpha", "x"}}), std::invalid_argument);
  EXPECT_THROW(catalog_get("hopf", {{"alpha", "1"}}), std::invalid_argument);
}

TEST(Catalog, ProvenanceTags) {
  int published = 0, derived = 0;
  for (const auto& name : catalog_names())
    for (const auto& f : catalog_get(name).facts) {
      published += f.provenance == Provenance::Published;
      derived += f.provenance == Provenance::Derived;
    }
  EXPECT_GT(published, 0);
  EXPECT_GT(derived, 0);
}
