#pragma once

// JSON documents for rings, Cartier modules, gamma-sheaves, lattices and
// intermediate-extension certificates.
//
//   ring:    {"p", "e", "modulus" (e > 1), "vars", "ideal"}
//   cartier: {"ring", "generators", "names", "relations", "kappa": {"a1,...,an,i": [poly]}}
//   gamma:   {"ring", "rank", "names", "relations", "gamma": [[poly]]}   gamma[j] = gamma(n_j)

#include <cstdint>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

#include "cartier_lab/crystal.hpp"

namespace cartier_lab {

using Json = nlohmann::json;

namespace detail {

inline const Json& field_of(const Json& j, const char* key, const std::string& where) {
  require(j.is_object(), ErrorCode::kValidation, where + " must be an object");
  auto it = j.find(key);
  require(it != j.end(), ErrorCode::kValidation, where + ": missing field '" + key + "'");
  return *it;
}

inline std::uint64_t uint_of(const Json& j, const std::string& where) {
  require(j.is_number_unsigned() || (j.is_number_integer() && j.get<std::int64_t>() >= 0), ErrorCode::kValidation,
          where + " must be a non-negative integer");
  return j.get<std::uint64_t>();
}

inline std::string string_of(const Json& j, const std::string& where) {
  require(j.is_string(), ErrorCode::kValidation, where + " must be a string");
  return j.get<std::string>();
}

inline const Json& array_of(const Json& j, const std::string& where) {
  require(j.is_array(), ErrorCode::kValidation, where + " must be an array");
  return j;
}

inline std::vector<std::string> names_of(const Json& j, std::size_t rank, const std::string& where) {
  auto it = j.find("names");
  if (it == j.end()) return {};
  std::vector<std::string> out;
  for (const auto& n : array_of(*it, where + ".names")) out.push_back(string_of(n, where + ".names[]"));
  require(out.size() == rank, ErrorCode::kValidation, where + ".names has wrong length");
  return out;
}

}  // namespace detail

inline Json to_json(const Polynomial& f) { return f.to_string(); }

inline Json to_json(const Vec& v) {
  Json out = Json::array();
  for (const auto& f : v) out.push_back(f.to_string());
  return out;
}

inline Vec vec_from_json(const RingPtr& ring, const Json& j, std::size_t rank, const std::string& where) {
  detail::array_of(j, where);
  require(j.size() == rank, ErrorCode::kValidation, where + " must have " + std::to_string(rank) + " entries");
  Vec out;
  for (const auto& s : j) out.push_back(parse_polynomial(ring, detail::string_of(s, where + "[]")));
  return out;
}

inline std::vector<Vec> vecs_from_json(const RingPtr& ring, const Json& j, std::size_t rank, const std::string& where) {
  std::vector<Vec> out;
  for (const auto& v : detail::array_of(j, where)) out.push_back(vec_from_json(ring, v, rank, where + "[]"));
  return out;
}

inline Json ring_to_json(const IdealSpec& ideal) {
  const auto& ring = *ideal.ring();
  Json out;
  out["p"] = ring.p();
  out["e"] = ring.f().e();
  if (ring.f().e() > 1) out["modulus"] = ring.f().modulus();
  out["vars"] = ring.vars();
  Json gens = Json::array();
  for (const auto& g : ideal.generators()) gens.push_back(g.to_string());
  out["ideal"] = gens;
  return out;
}

inline std::pair<RingPtr, IdealSpec> ring_from_json(const Json& j) {
  const std::string w = "ring";
  const auto p = detail::uint_of(detail::field_of(j, "p", w), "ring.p");
  const auto e = j.contains("e") ? detail::uint_of(j["e"], "ring.e") : 1;
  require(p >= 2 && p < 1000 && e >= 1 && e <= 8, ErrorCode::kValidation, "ring.p or ring.e out of range");
  FieldPtr field;
  if (j.contains("modulus")) {
    std::vector<std::uint32_t> mod;
    for (const auto& c : detail::array_of(j["modulus"], "ring.modulus"))
      mod.push_back(static_cast<std::uint32_t>(detail::uint_of(c, "ring.modulus[]")));
    require(mod.size() == e + 1, ErrorCode::kValidation, "ring.modulus must have degree e");
    field = FrobeniusContext::make_with_modulus(static_cast<std::uint32_t>(p), std::move(mod));
  } else {
    field = FrobeniusContext::make(static_cast<std::uint32_t>(p), static_cast<std::uint32_t>(e));
  }
  std::vector<std::string> vars;
  if (j.contains("vars"))
    for (const auto& v : detail::array_of(j["vars"], "ring.vars")) vars.push_back(detail::string_of(v, "ring.vars[]"));
  auto ring = PolyRing::make(field, vars);
  std::vector<Polynomial> gens;
  if (j.contains("ideal"))
    for (const auto& g : detail::array_of(j["ideal"], "ring.ideal"))
      gens.push_back(parse_polynomial(ring, detail::string_of(g, "ring.ideal[]")));
  return {ring, IdealSpec::make(ring, std::move(gens))};
}

inline std::string kappa_key(const Exponents& a, std::size_t n, std::size_t i) {
  std::string key;
  for (std::size_t k = 0; k < n; ++k) key += std::to_string(a[k]) + ",";
  return key + std::to_string(i);
}

inline Json to_json(const CartierModule& m) {
  const auto& ring = m.ring();
  const std::size_t n = ring->nvars();
  Json out;
  out["ring"] = ring_to_json(m.ideal());
  out["generators"] = m.rank();
  out["names"] = m.names();
  Json rels = Json::array();
  for (const auto& r : m.relations()) rels.push_back(to_json(r));
  out["relations"] = rels;
  Json kappa = Json::object();
  for (std::size_t code = 0; code < m.monomials(); ++code)
    for (std::size_t i = 0; i < m.rank(); ++i)
      kappa[kappa_key(exponent_digits(code, ring->p(), n), n, i)] = to_json(m.table()[code * m.rank() + i]);
  out["kappa"] = kappa;
  return out;
}

inline CartierModule cartier_from_json(const Json& j) {
  auto [ring, ideal] = ring_from_json(detail::field_of(j, "ring", "module"));
  const std::size_t r = detail::uint_of(detail::field_of(j, "generators", "module"), "module.generators");
  require(r <= 64, ErrorCode::kCapExceeded, "module.generators above 64");
  const std::size_t n = ring->nvars();
  const std::uint32_t p = ring->p();
  std::vector<Vec> rels;
  if (j.contains("relations")) rels = vecs_from_json(ring, j["relations"], r, "module.relations");
  std::vector<Vec> table(ring->frobenius_rank() * r, zero_vec(ring, r));
  std::vector<bool> seen(table.size(), false);
  const auto& kappa = detail::field_of(j, "kappa", "module");
  require(kappa.is_object(), ErrorCode::kValidation, "module.kappa must be an object");
  for (const auto& [key, value] : kappa.items()) {
    std::vector<std::uint64_t> parts;
    std::stringstream ss(key);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
      require(!tok.empty() && tok.find_first_not_of("0123456789") == std::string::npos && tok.size() < 6,
              ErrorCode::kValidation, "module.kappa key '" + key + "' is malformed");
      parts.push_back(std::stoull(tok));
    }
    require(parts.size() == n + 1, ErrorCode::kValidation, "module.kappa key '" + key + "' needs n + 1 entries");
    Exponents a{};
    for (std::size_t k = 0; k < n; ++k) {
      require(parts[k] < p, ErrorCode::kValidation, "module.kappa key '" + key + "' has an exponent >= p");
      a[k] = static_cast<std::uint32_t>(parts[k]);
    }
    require(parts[n] < r, ErrorCode::kValidation, "module.kappa key '" + key + "' has a generator index out of range");
    const std::size_t idx = digit_code(a, p, n) * r + parts[n];
    require(!seen[idx], ErrorCode::kValidation, "module.kappa key '" + key + "' repeated");
    seen[idx] = true;
    table[idx] = vec_from_json(ring, value, r, "module.kappa[" + key + "]");
  }
  return CartierModule(ring, ideal, r, std::move(rels), std::move(table), detail::names_of(j, r, "module"));
}

inline Json to_json(const GammaSheaf& g) {
  Json out;
  out["ring"] = ring_to_json(g.ideal());
  out["rank"] = g.rank();
  out["names"] = g.names();
  Json rels = Json::array();
  for (const auto& r : g.relations()) rels.push_back(to_json(r));
  out["relations"] = rels;
  Json cols = Json::array();
  for (const auto& c : g.columns()) cols.push_back(to_json(c));
  out["gamma"] = cols;
  return out;
}

inline GammaSheaf gamma_from_json(const Json& j) {
  auto [ring, ideal] = ring_from_json(detail::field_of(j, "ring", "gamma-sheaf"));
  const std::size_t r = detail::uint_of(detail::field_of(j, "rank", "gamma-sheaf"), "gamma-sheaf.rank");
  require(r <= 64, ErrorCode::kCapExceeded, "gamma-sheaf.rank above 64");
  std::vector<Vec> rels;
  if (j.contains("relations")) rels = vecs_from_json(ring, j["relations"], r, "gamma-sheaf.relations");
  auto cols = vecs_from_json(ring, detail::field_of(j, "gamma", "gamma-sheaf"), r, "gamma-sheaf.gamma");
  require(cols.size() == r, ErrorCode::kValidation, "gamma-sheaf.gamma needs one column per generator");
  return GammaSheaf(ring, ideal, r, std::move(rels), std::move(cols), detail::names_of(j, r, "gamma-sheaf"));
}

inline Json to_json(const Lattice& l) {
  Json out;
  out["g"] = l.ambient()->g.to_string();
  out["exponent"] = l.exponent();
  Json nums = Json::array();
  for (const auto& v : l.generators()) nums.push_back(to_json(v));
  out["numerators"] = nums;
  out["generators"] = l.generator_strings();
  return out;
}

inline Lattice lattice_from_json(const AmbientPtr& amb, const Json& j) {
  const auto& ring = amb->mbar.ring();
  require(parse_polynomial(ring, detail::string_of(detail::field_of(j, "g", "lattice"), "lattice.g")) == amb->g,
          ErrorCode::kContextMismatch, "lattice belongs to another localization");
  const auto k = detail::uint_of(detail::field_of(j, "exponent", "lattice"), "lattice.exponent");
  require(k < (1u << 20), ErrorCode::kValidation, "lattice.exponent too large");
  return Lattice(amb, static_cast<std::uint32_t>(k),
                 vecs_from_json(ring, detail::field_of(j, "numerators", "lattice"), amb->mbar.rank(), "lattice.numerators"));
}

inline Json to_json(const IECertificate& c) {
  Json out;
  out["lattice"] = to_json(c.result);
  out["saturated"] = to_json(c.saturated);
  out["stable"] = to_json(c.stable);
  out["module"] = to_json(c.module);
  out["checks"] = {{"localization_agrees", c.localization_agrees},
                   {"torsion_nilpotent", c.torsion_nilpotent},
                   {"quotient_nilpotent_k1", c.quotient_nilpotent},
                   {"quotient_nilpotent_kstar", c.quotient_nilpotent_k_star}};
  out["saturation_steps"] = c.saturation_steps;
  out["k_star"] = c.k_star;
  out["localization_exponent"] = c.localization_exponent;
  out["passed"] = c.passed();
  return out;
}

/// Parses text, turning JSON syntax errors into validation errors with a byte offset.
inline Json parse_json(const std::string& text, const std::string& origin) {
  try {
    return Json::parse(text);
  } catch (const Json::parse_error& e) {
    fail(ErrorCode::kValidation, origin + ": malformed JSON at byte " + std::to_string(e.byte) + ": " + e.what());
  }
}

/// 64-bit FNV-1a.
inline std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

}  // namespace cartier_lab
