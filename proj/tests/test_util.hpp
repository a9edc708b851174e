#pragma once

#include <memory>

#include "imdial/env.hpp"

namespace imdial::fixtures {

/// One bookable domain with two informable slots and one requestable slot.
inline Ontology tiny_ontology() {
  DomainSpec d;
  d.name = "shop";
  d.informable = {{"area", {"north", "south"}}, {"kind", {"a", "b", "c"}}};
  d.requestable = {"phone"};
  d.bookable = true;
  return Ontology({d});
}

inline Ontology two_domain_ontology() {
  DomainSpec a;
  a.name = "hotel";
  a.informable = {{"area", {"north", "south", "east"}}, {"stars", {"3", "4"}}};
  a.requestable = {"phone", "postcode"};
  a.bookable = true;
  DomainSpec b;
  b.name = "taxi";
  b.informable = {{"departure", {"x", "y"}}};
  b.requestable = {"cartype"};
  return Ontology({a, b});
}

inline std::shared_ptr<const World> tiny_world(std::uint64_t db_seed = 0, int per_domain = 8) {
  Ontology o = tiny_ontology();
  EntityDatabase db = EntityDatabase::generate(o, db_seed, per_domain);
  return World::make(std::move(o), std::move(db), TemplateSet::default_templates());
}

}  // namespace imdial::fixtures
