#pragma once

// Template NLG and the hashed utterance featurizer used by the Utt variants
// of the intrinsic-reward modules.

#include <cstdint>
#include <map>
#include <string>
#include <tuple>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "imdial/domain.hpp"

namespace imdial {

enum class Speaker { User, System };

std::string_view speaker_name(Speaker s);

struct Utterance {
  std::string text;
  Speaker speaker = Speaker::User;
};

/// Templates keyed by (speaker, intent, domain, slot). Domain and slot may be
/// the wildcard "*"; lookup tries the exact key, then (domain, *), then
/// (*, slot), then (*, *). Placeholders: {domain}, {slot}, {value}.
class TemplateSet {
 public:
  static constexpr const char* kWildcard = "*";

  TemplateSet() = default;

  static TemplateSet default_templates();

  void add(Speaker speaker, Intent intent, std::string domain, std::string slot,
           std::string text);

  /// nullptr when no template applies.
  const std::string* lookup(Speaker speaker, const DialogueAct& act) const;

  /// Every act either side can produce under `ontology` must resolve to a
  /// template; throws TemplateError listing the first gap.
  void check_coverage(const Ontology& ontology) const;

  std::size_t size() const { return templates_.size(); }

  nlohmann::json to_json() const;
  static TemplateSet from_json(const nlohmann::json& j);

 private:
  using Key = std::tuple<Speaker, Intent, std::string, std::string>;
  std::map<Key, std::string> templates_;
};

/// Per-act realizations joined by a single space, in canonical act order.
/// Throws ArgumentError on an empty set and TemplateError on a missing template.
Utterance realize(const TemplateSet& templates, const ActSet& acts, Speaker speaker);

/// Lowercase alphanumeric tokens; everything else separates.
std::vector<std::string> tokenize(std::string_view text);

/// FNV-1a, 64-bit.
std::uint64_t fnv1a64(std::string_view bytes);

/// Hashed bag-of-words over a (user, system) utterance pair followed by a
/// frozen Gaussian projection (entries N(0, 1/embed_dim)). Tokens are hashed with a speaker prefix
/// ("u:" / "s:") so the two sides occupy separate feature identities.
class UtteranceEncoder {
 public:
  UtteranceEncoder(int vocab_dim = 2048, int embed_dim = 256, int max_tokens = 200,
                   std::uint64_t seed = 0x5eed);

  int vocab_dim() const { return vocab_dim_; }
  int embed_dim() const { return embed_dim_; }
  int max_tokens() const { return max_tokens_; }

  std::size_t bucket(std::string_view prefixed_token) const;

  /// Raw bucket counts after truncation to max_tokens (user tokens first).
  Eigen::VectorXd hashed_counts(const std::string& user_text, const std::string& system_text) const;

  /// L2-normalized counts times the projection; the zero vector for an empty pair.
  Eigen::VectorXd encode(const std::string& user_text, const std::string& system_text) const;

  /// Checksum of the frozen projection.
  std::uint64_t checksum() const;

 private:
  int vocab_dim_;
  int embed_dim_;
  int max_tokens_;
  Eigen::MatrixXd projection_;  // embed_dim x vocab_dim
};

}  // namespace imdial
