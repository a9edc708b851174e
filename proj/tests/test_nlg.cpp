#include <gtest/gtest.h>

#include <cmath>

#include "imdial/error.hpp"
#include "imdial/nlg.hpp"
#include "imdial/random.hpp"

using namespace imdial;

TEST(Realize, ShippedTemplateText) {
  const auto t = TemplateSet::default_templates();
  const ActSet acts{DialogueAct::inform("restaurant", "food", "italian")};
  EXPECT_EQ(realize(t, acts, Speaker::User).text, "i am looking for italian food .");
}

TEST(Realize, JoinsInCanonicalOrderAndIsDeterministic) {
  const auto t = TemplateSet::default_templates();
  const ActSet acts{DialogueAct::request("hotel", "phone"), DialogueAct::of(Intent::Bye),
                    DialogueAct::inform("hotel", "area", "north")};
  const auto a = realize(t, acts, Speaker::User).text;
  EXPECT_EQ(a, realize(t, acts, Speaker::User).text);
  EXPECT_EQ(a, "thank you , goodbye . it should be in the north . what is the phone ?");
}

TEST(Realize, ErrorsOnEmptySetAndMissingTemplate) {
  const auto t = TemplateSet::default_templates();
  EXPECT_THROW(realize(t, ActSet{}, Speaker::System), ArgumentError);
  TemplateSet sparse;
  sparse.add(Speaker::User, Intent::Bye, "*", "*", "bye");
  EXPECT_THROW(realize(sparse, ActSet{DialogueAct::of(Intent::Greet)}, Speaker::User), TemplateError);
  EXPECT_THROW(sparse.check_coverage(Ontology::default_ontology()), TemplateError);
  EXPECT_NO_THROW(t.check_coverage(Ontology::default_ontology()));
}

TEST(Realize, LookupPrefersExactKey) {
  TemplateSet t;
  t.add(Speaker::System, Intent::Inform, "*", "*", "generic");
  t.add(Speaker::System, Intent::Inform, "hotel", "*", "domain");
  t.add(Speaker::System, Intent::Inform, "*", "phone", "slot");
  t.add(Speaker::System, Intent::Inform, "hotel", "phone", "exact");
  EXPECT_EQ(*t.lookup(Speaker::System, DialogueAct::inform("hotel", "phone", "1")), "exact");
  EXPECT_EQ(*t.lookup(Speaker::System, DialogueAct::inform("hotel", "area", "1")), "domain");
  EXPECT_EQ(*t.lookup(Speaker::System, DialogueAct::inform("taxi", "phone", "1")), "slot");
  EXPECT_EQ(*t.lookup(Speaker::System, DialogueAct::inform("taxi", "area", "1")), "generic");
  EXPECT_EQ(t.lookup(Speaker::User, DialogueAct::inform("taxi", "area", "1")), nullptr);
}

TEST(Templates, JsonRoundTrip) {
  const auto t = TemplateSet::default_templates();
  const auto back = TemplateSet::from_json(t.to_json());
  EXPECT_EQ(back.to_json(), t.to_json());
}

TEST(Tokenize, LowercaseAlphanumeric) {
  EXPECT_EQ(tokenize("Hello, World! 4-star"), (std::vector<std::string>{"hello", "world", "4", "star"}));
  EXPECT_TRUE(tokenize("  ,.; ").empty());
}

TEST(Fnv, KnownVectors) {
  EXPECT_EQ(fnv1a64(""), 0xcbf29ce484222325ULL);
  EXPECT_EQ(fnv1a64("a"), 0xaf63dc4c8601ec8cULL);
}

TEST(Encoder, EmptyPairIsZero) {
  const UtteranceEncoder enc;
  const auto v = enc.encode("", "");
  EXPECT_EQ(v.size(), 256);
  EXPECT_EQ(v.norm(), 0.0);
}

TEST(Encoder, IdenticalPairsIdenticalVectors) {
  const UtteranceEncoder a, b;
  EXPECT_EQ(a.checksum(), b.checksum());
  const auto x = a.encode("i want a cheap hotel", "how about alpha ?");
  EXPECT_TRUE(x == b.encode("i want a cheap hotel", "how about alpha ?"));
}

TEST(Encoder, DisjointTokensHaveZeroCosineBeforeProjection) {
  const UtteranceEncoder enc;
  // Hand-computed bucket ids for each prefixed token.
  const std::vector<std::string> left{"u:cheap", "u:hotel"}, right{"u:north", "u:train"};
  std::set<std::size_t> lb, rb;
  for (const auto& t : left) lb.insert(fnv1a64(t) % 2048);
  for (const auto& t : right) rb.insert(fnv1a64(t) % 2048);
  std::vector<std::size_t> common;
  std::set_intersection(lb.begin(), lb.end(), rb.begin(), rb.end(), std::back_inserter(common));
  ASSERT_TRUE(common.empty()) << "pick tokens without a collision";
  const auto a = enc.hashed_counts("cheap hotel", "");
  const auto b = enc.hashed_counts("north train", "");
  EXPECT_EQ(a.dot(b), 0.0);
  for (std::size_t k : lb) EXPECT_EQ(a[static_cast<Eigen::Index>(k)], 1.0);
}

TEST(Encoder, SpeakerPrefixSeparatesSides) {
  const UtteranceEncoder enc;
  const auto a = enc.hashed_counts("hotel", "");
  const auto b = enc.hashed_counts("", "hotel");
  EXPECT_EQ(a[static_cast<Eigen::Index>(enc.bucket("u:hotel"))], 1.0);
  EXPECT_EQ(b[static_cast<Eigen::Index>(enc.bucket("s:hotel"))], 1.0);
}

TEST(Encoder, TruncatesUserFirst) {
  const UtteranceEncoder enc(2048, 16, 3);
  const auto c = enc.hashed_counts("a b c d e", "x y");
  EXPECT_EQ(c.sum(), 3.0);
  EXPECT_EQ(c[static_cast<Eigen::Index>(enc.bucket("s:x"))], 0.0);
  const auto d = enc.hashed_counts("a", "x y z w");
  EXPECT_EQ(d.sum(), 3.0);
  EXPECT_EQ(d[static_cast<Eigen::Index>(enc.bucket("s:z"))], 0.0);
}

TEST(Encoder, EncodeEqualsNormalizedCountsTimesProjection) {
  // The projection is rebuilt here from the documented generator as an oracle.
  const int vocab = 64, embed = 8;
  const UtteranceEncoder enc(vocab, embed, 200, 99);
  Rng rng(99);
  Eigen::MatrixXd p(embed, vocab);
  for (int c = 0; c < vocab; ++c) {
    for (int r = 0; r < embed; ++r) p(r, c) = rng.normal() / std::sqrt(8.0);
  }
  const auto counts = enc.hashed_counts("the phone is 01223 .", "how about alpha ?");
  const Eigen::VectorXd expected = p * (counts / counts.norm());
  EXPECT_LT((enc.encode("the phone is 01223 .", "how about alpha ?") - expected).norm(), 1e-12);
}
