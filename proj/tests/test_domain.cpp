#include <gtest/gtest.h>

#include "imdial/domain.hpp"
#include "imdial/error.hpp"
#include "test_util.hpp"

using namespace imdial;

namespace {

// Independent linear scan used as the query oracle.
std::vector<int> scan_ids(const EntityDatabase& db, const std::string& domain, const Constraints& c) {
  std::vector<int> ids;
  for (const auto& e : db.entities(domain)) {
    bool ok = true;
    for (const auto& [slot, value] : c) {
      auto it = e.slots.find(slot);
      if (it == e.slots.end() || it->second != value) ok = false;
    }
    if (ok) ids.push_back(e.id);
  }
  std::sort(ids.begin(), ids.end());
  return ids;
}

}  // namespace

TEST(Ontology, RejectsEmptyAndDuplicates) {
  EXPECT_THROW(Ontology(std::vector<DomainSpec>{}), ConfigError);
  DomainSpec d{"x", {{"s", {"v"}}}, {}, false};
  EXPECT_THROW(Ontology({d, d}), ConfigError);
  DomainSpec empty_values{"y", {{"s", {}}}, {}, false};
  EXPECT_THROW(Ontology({empty_values}), ConfigError);
}

TEST(Ontology, DefaultHasFiveDomainsAndRoundTrips) {
  const Ontology o = Ontology::default_ontology();
  EXPECT_EQ(o.domains().size(), 5u);
  const Ontology back = Ontology::from_json(o.to_json());
  EXPECT_EQ(back.to_json(), o.to_json());
  EXPECT_THROW(o.domain("spaceport"), DomainError);
}

TEST(Database, GenerationIsDeterministicAndValid) {
  const Ontology o = Ontology::default_ontology();
  const auto a = EntityDatabase::generate(o, 3);
  const auto b = EntityDatabase::generate(o, 3);
  EXPECT_EQ(a.to_json(), b.to_json());
  EXPECT_NE(a.to_json(), EntityDatabase::generate(o, 4).to_json());
  for (const auto& d : o.domains()) {
    for (const auto& e : a.entities(d.name)) {
      for (const auto& s : d.informable) {
        ASSERT_TRUE(e.slots.count(s.name));
        EXPECT_NE(std::find(s.values.begin(), s.values.end(), e.slots.at(s.name)), s.values.end());
      }
    }
  }
  const auto back = EntityDatabase::from_json(o, a.to_json());
  EXPECT_EQ(back.to_json(), a.to_json());
}

TEST(Query, MatchesLinearScanOracle) {
  const Ontology o = Ontology::default_ontology();
  const auto db = EntityDatabase::generate(o, 11);
  Rng rng(5);
  for (int trial = 0; trial < 500; ++trial) {
    const auto& d = o.domains()[rng.uniform_index(o.domains().size())];
    Constraints c;
    for (const auto& s : d.informable) {
      if (rng.bernoulli(0.4)) c[s.name] = s.values[rng.uniform_index(s.values.size())];
    }
    std::vector<int> got;
    for (const auto& e : query_entities(o, db, d.name, c)) got.push_back(e.id);
    EXPECT_EQ(got, scan_ids(db, d.name, c));
  }
}

TEST(Query, EdgeCases) {
  const Ontology o = Ontology::default_ontology();
  const auto db = EntityDatabase::generate(o, 0);
  EXPECT_EQ(query_entities(o, db, "hotel", {}).size(), db.entities("hotel").size());
  const Entity& third = db.entities("hotel")[3];
  Constraints self;
  for (const auto& s : o.domain("hotel").informable) self[s.name] = third.slots.at(s.name);
  const auto hits = query_entities(o, db, "hotel", self);
  EXPECT_TRUE(std::any_of(hits.begin(), hits.end(), [&](const Entity& e) { return e.id == third.id; }));
  EXPECT_THROW(query_entities(o, db, "zoo", {}), DomainError);
  EXPECT_THROW(query_entities(o, db, "hotel", {{"colour", "red"}}), ConstraintError);
  EXPECT_TRUE(query_entities(o, db, "hotel", {{"area", "nowhere"}}).empty());
}

TEST(Booking, ConfirmIffQueryNonEmpty) {
  const Ontology o = Ontology::default_ontology();
  const auto db = EntityDatabase::generate(o, 2);
  EXPECT_TRUE(check_booking(o, db, "hotel", {}).confirmed);
  EXPECT_FALSE(check_booking(o, db, "hotel", {{"area", "nowhere"}}).confirmed);
  EXPECT_THROW(check_booking(o, db, "attraction", {}), DomainError);
  Rng rng(9);
  const auto& spec = o.domain("restaurant");
  for (int i = 0; i < 200; ++i) {
    Constraints c;
    for (const auto& s : spec.informable) {
      if (rng.bernoulli(0.5)) c[s.name] = s.values[rng.uniform_index(s.values.size())];
    }
    const auto out = check_booking(o, db, "restaurant", c);
    EXPECT_EQ(out.confirmed, !scan_ids(db, "restaurant", c).empty());
    EXPECT_EQ(out.entity.has_value(), out.confirmed);
  }
}

TEST(Goals, EverySampledGoalIsSatisfiable) {
  const Ontology o = Ontology::default_ontology();
  const auto db = EntityDatabase::generate(o, 0);
  for (std::uint64_t seed = 0; seed < 2000; ++seed) {
    const UserGoal g = sample_goal(o, db, seed);
    ASSERT_GE(g.sections.size(), 1u);
    ASSERT_LE(g.sections.size(), 3u);
    std::set<std::string> seen;
    for (const auto& s : g.sections) {
      EXPECT_TRUE(seen.insert(s.domain).second);
      EXPECT_FALSE(scan_ids(db, s.domain, s.constraints).empty()) << "seed " << seed;
      EXPECT_TRUE(std::is_sorted(s.requests.begin(), s.requests.end()));
      if (s.wants_booking) EXPECT_TRUE(o.domain(s.domain).bookable);
      for (const auto& [slot, alt] : s.fallback) {
        EXPECT_TRUE(s.constraints.count(slot));
        EXPECT_NE(s.constraints.at(slot), alt);
      }
    }
  }
}

TEST(Goals, DeterministicAndSeedSensitive) {
  const Ontology o = fixtures::two_domain_ontology();
  const auto db = EntityDatabase::generate(o, 1);
  EXPECT_EQ(sample_goal(o, db, 7), sample_goal(o, db, 7));
  int differing = 0;
  for (std::uint64_t s = 0; s < 20; ++s) differing += !(sample_goal(o, db, s) == sample_goal(o, db, s + 100));
  EXPECT_GT(differing, 0);
}

TEST(Goals, SingleValuedOntologyFixesConstraintValues) {
  DomainSpec d{"only", {{"a", {"x"}}, {"b", {"y"}}}, {"phone"}, false};
  const Ontology o({d});
  const auto db = EntityDatabase::generate(o, 0, 3);
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const auto g = sample_goal(o, db, seed);
    ASSERT_EQ(g.sections.size(), 1u);
    for (const auto& [slot, value] : g.sections[0].constraints) {
      EXPECT_EQ(value, slot == "a" ? "x" : "y");
    }
  }
}

TEST(Acts, CanonicalOrderDedupAndCap) {
  ActSet s(3);
  EXPECT_TRUE(s.insert(DialogueAct::of(Intent::Offer, "hotel")));
  EXPECT_TRUE(s.insert(DialogueAct::inform("attraction", "area", "north")));
  EXPECT_FALSE(s.insert(DialogueAct::of(Intent::Offer, "hotel")));
  EXPECT_TRUE(s.insert(DialogueAct::of(Intent::Bye)));
  EXPECT_THROW(s.insert(DialogueAct::of(Intent::Greet)), ActError);
  ASSERT_EQ(s.size(), 3u);
  EXPECT_TRUE(std::is_sorted(s.begin(), s.end()));
  ActSet t{DialogueAct::of(Intent::Bye), DialogueAct::inform("attraction", "area", "north"),
           DialogueAct::of(Intent::Offer, "hotel")};
  EXPECT_EQ(s, t);
}

TEST(Acts, ValidationAndIntentNames) {
  EXPECT_NO_THROW(validate_act(DialogueAct::inform("hotel", "area", "north"), true));
  EXPECT_THROW(validate_act(DialogueAct::inform("hotel", "area"), true), ActError);
  EXPECT_THROW(validate_act(DialogueAct::request("", "area"), false), ActError);
  for (int i = 0; i < kIntentCount; ++i) {
    const auto in = static_cast<Intent>(i);
    EXPECT_EQ(parse_intent(intent_name(in)), in);
  }
  EXPECT_THROW(parse_intent("shout"), ActError);
}
