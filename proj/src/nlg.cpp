#include "imdial/nlg.hpp"

#include <cctype>
#include <cmath>
#include <cstring>

#include "imdial/error.hpp"
#include "imdial/random.hpp"

namespace imdial {

using nlohmann::json;

std::string_view speaker_name(Speaker s) { return s == Speaker::User ? "user" : "system"; }

namespace {

Speaker parse_speaker(std::string_view s) {
  if (s == "user") return Speaker::User;
  if (s == "system") return Speaker::System;
  throw TemplateError("unknown speaker: " + std::string(s));
}

void replace_all(std::string& s, std::string_view from, std::string_view to) {
  std::size_t pos = 0;
  while ((pos = s.find(from, pos)) != std::string::npos) {
    s.replace(pos, from.size(), to);
    pos += to.size();
  }
}

}  // namespace

void TemplateSet::add(Speaker speaker, Intent intent, std::string domain, std::string slot,
                      std::string text) {
  templates_[Key{speaker, intent, std::move(domain), std::move(slot)}] = std::move(text);
}

const std::string* TemplateSet::lookup(Speaker speaker, const DialogueAct& act) const {
  const std::string dom = act.domain.empty() ? kWildcard : act.domain;
  const std::string slot = act.slot.empty() ? kWildcard : act.slot;
  for (const auto& [d, s] : {std::pair{dom, slot}, std::pair{dom, std::string(kWildcard)},
                             std::pair{std::string(kWildcard), slot},
                             std::pair{std::string(kWildcard), std::string(kWildcard)}}) {
    auto it = templates_.find(Key{speaker, act.intent, d, s});
    if (it != templates_.end()) return &it->second;
  }
  return nullptr;
}

void TemplateSet::check_coverage(const Ontology& ontology) const {
  std::vector<std::pair<Speaker, DialogueAct>> reachable;
  reachable.emplace_back(Speaker::User, DialogueAct::of(Intent::Bye));
  reachable.emplace_back(Speaker::User, DialogueAct::of(Intent::Greet));
  reachable.emplace_back(Speaker::System, DialogueAct::of(Intent::Bye));
  reachable.emplace_back(Speaker::System, DialogueAct::of(Intent::Greet));
  for (const auto& d : ontology.domains()) {
    for (const auto& s : d.informable) {
      reachable.emplace_back(Speaker::User, DialogueAct::inform(d.name, s.name));
      reachable.emplace_back(Speaker::System, DialogueAct::inform(d.name, s.name));
      reachable.emplace_back(Speaker::System, DialogueAct::request(d.name, s.name));
    }
    for (const auto& r : d.requestable) {
      reachable.emplace_back(Speaker::User, DialogueAct::request(d.name, r));
      reachable.emplace_back(Speaker::System, DialogueAct::inform(d.name, r));
    }
    reachable.emplace_back(Speaker::System, DialogueAct{Intent::Offer, d.name, "name", {}});
    reachable.emplace_back(Speaker::System, DialogueAct::of(Intent::NoOffer, d.name));
    if (d.bookable) {
      reachable.emplace_back(Speaker::User, DialogueAct::of(Intent::Book, d.name));
      reachable.emplace_back(Speaker::System, DialogueAct::of(Intent::Book, d.name));
      reachable.emplace_back(Speaker::System, DialogueAct{Intent::BookConfirm, d.name, "ref", {}});
      reachable.emplace_back(Speaker::System, DialogueAct::of(Intent::BookFail, d.name));
    }
  }
  for (const auto& [speaker, act] : reachable) {
    if (lookup(speaker, act) == nullptr) {
      throw TemplateError("no " + std::string(speaker_name(speaker)) + " template for " +
                          act.to_string());
    }
  }
}

TemplateSet TemplateSet::default_templates() {
  TemplateSet t;
  const std::string w = kWildcard;
  using I = Intent;
  const auto U = Speaker::User;
  const auto S = Speaker::System;

  t.add(U, I::Inform, w, w, "i want the {slot} to be {value} .");
  t.add(U, I::Inform, w, "area", "it should be in the {value} .");
  t.add(U, I::Inform, w, "pricerange", "something in the {value} price range .");
  t.add(U, I::Inform, w, "type", "i would like a {value} .");
  t.add(U, I::Inform, w, "departure", "i am leaving from {value} .");
  t.add(U, I::Inform, w, "destination", "i am going to {value} .");
  t.add(U, I::Inform, w, "leaveat", "i want to leave in the {value} .");
  t.add(U, I::Inform, w, "day", "i am travelling on {value} .");
  t.add(U, I::Inform, "restaurant", "food", "i am looking for {value} food .");
  t.add(U, I::Inform, "hotel", "stars", "it should have {value} stars .");
  t.add(U, I::Inform, "attraction", "entrance", "the entrance should be {value} .");
  t.add(U, I::Request, w, w, "what is the {slot} ?");
  t.add(U, I::Book, w, w, "please book the {domain} for me .");
  t.add(U, I::Bye, w, w, "thank you , goodbye .");
  t.add(U, I::Greet, w, w, "hello .");

  t.add(S, I::Inform, w, w, "the {slot} is {value} .");
  t.add(S, I::Request, w, w, "what {slot} would you like ?");
  t.add(S, I::Request, w, "area", "which area do you prefer ?");
  t.add(S, I::Request, w, "day", "which day will you travel ?");
  t.add(S, I::Offer, w, w, "how about {value} ?");
  t.add(S, I::NoOffer, w, w, "sorry , there is no {domain} matching your request .");
  t.add(S, I::Book, w, w, "shall i book the {domain} ?");
  t.add(S, I::BookConfirm, w, w, "your {domain} is booked , the reference is {value} .");
  t.add(S, I::BookFail, w, w, "sorry , the {domain} booking failed .");
  t.add(S, I::Bye, w, w, "goodbye .");
  t.add(S, I::Greet, w, w, "how can i help you ?");
  return t;
}

json TemplateSet::to_json() const {
  json arr = json::array();
  for (const auto& [key, text] : templates_) {
    const auto& [speaker, intent, domain, slot] = key;
    arr.push_back({{"speaker", speaker_name(speaker)},
                   {"intent", intent_name(intent)},
                   {"domain", domain},
                   {"slot", slot},
                   {"text", text}});
  }
  return json{{"templates", arr}};
}

TemplateSet TemplateSet::from_json(const json& j) {
  TemplateSet t;
  try {
    for (const auto& e : j.at("templates")) {
      t.add(parse_speaker(e.at("speaker").get<std::string>()),
            parse_intent(e.at("intent").get<std::string>()), e.value("domain", std::string(kWildcard)),
            e.value("slot", std::string(kWildcard)), e.at("text").get<std::string>());
    }
  } catch (const json::exception& e) {
    throw TemplateError(std::string("malformed template json: ") + e.what());
  } catch (const ActError& e) {
    throw TemplateError(e.what());
  }
  return t;
}

Utterance realize(const TemplateSet& templates, const ActSet& acts, Speaker speaker) {
  if (acts.empty()) throw ArgumentError("cannot realize an empty act set");
  Utterance out{{}, speaker};
  for (const auto& act : acts) {  // ActSet iterates in canonical order
    const std::string* tmpl = templates.lookup(speaker, act);
    if (tmpl == nullptr) throw TemplateError("no template for " + act.to_string());
    std::string text = *tmpl;
    replace_all(text, "{domain}", act.domain);
    replace_all(text, "{slot}", act.slot);
    replace_all(text, "{value}", act.value);
    if (!out.text.empty()) out.text += ' ';
    out.text += text;
  }
  return out;
}

std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> tokens;
  std::string cur;
  for (char ch : text) {
    const auto c = static_cast<unsigned char>(ch);
    if (std::isalnum(c)) {
      cur += static_cast<char>(std::tolower(c));
    } else if (!cur.empty()) {
      tokens.push_back(std::move(cur));
      cur.clear();
    }
  }
  if (!cur.empty()) tokens.push_back(std::move(cur));
  return tokens;
}

std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (char c : bytes) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  return h;
}

UtteranceEncoder::UtteranceEncoder(int vocab_dim, int embed_dim, int max_tokens,
                                   std::uint64_t seed)
    : vocab_dim_(vocab_dim), embed_dim_(embed_dim), max_tokens_(max_tokens) {
  if (vocab_dim <= 0 || embed_dim <= 0 || max_tokens <= 0) {
    throw ConfigError("utterance encoder dimensions must be positive");
  }
  Rng rng(seed);
  // 1/sqrt(embed_dim) keeps a unit-norm count vector near unit norm after projection.
  const double scale = 1.0 / std::sqrt(static_cast<double>(embed_dim));
  projection_.resize(embed_dim, vocab_dim);
  for (int c = 0; c < vocab_dim; ++c) {
    for (int r = 0; r < embed_dim; ++r) projection_(r, c) = scale * rng.normal();
  }
}

std::size_t UtteranceEncoder::bucket(std::string_view prefixed_token) const {
  return static_cast<std::size_t>(fnv1a64(prefixed_token) % static_cast<std::uint64_t>(vocab_dim_));
}

Eigen::VectorXd UtteranceEncoder::hashed_counts(const std::string& user_text,
                                                const std::string& system_text) const {
  Eigen::VectorXd counts = Eigen::VectorXd::Zero(vocab_dim_);
  int budget = max_tokens_;
  for (const auto& [prefix, text] : {std::pair{"u:", &user_text}, std::pair{"s:", &system_text}}) {
    for (const auto& tok : tokenize(*text)) {
      if (budget == 0) return counts;
      counts[static_cast<Eigen::Index>(bucket(std::string(prefix) + tok))] += 1.0;
      --budget;
    }
  }
  return counts;
}

Eigen::VectorXd UtteranceEncoder::encode(const std::string& user_text,
                                         const std::string& system_text) const {
  Eigen::VectorXd counts = hashed_counts(user_text, system_text);
  const double norm = counts.norm();
  Eigen::VectorXd out = Eigen::VectorXd::Zero(embed_dim_);
  if (norm == 0.0) return out;
  for (Eigen::Index b = 0; b < counts.size(); ++b) {
    if (counts[b] != 0.0) out.noalias() += (counts[b] / norm) * projection_.col(b);
  }
  return out;
}

std::uint64_t UtteranceEncoder::checksum() const {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  const double* p = projection_.data();
  for (Eigen::Index i = 0; i < projection_.size(); ++i) {
    std::uint64_t bits;
    std::memcpy(&bits, p + i, sizeof bits);
    h = (h ^ bits) * 0x100000001b3ULL;
  }
  return h;
}

}  // namespace imdial
