#pragma once

// JSON interchange: instances, assignments and fractional solutions.
//
//   {"players":[{"id":..,"budget":"n/d"}],"items":[..],
//    "prices":[{"player":..,"item":..,"price":"n/d"}]}
//
// Rationals are strings ("n" or "n/d"); plain JSON integers are also accepted.

#include <istream>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "mba/errors.hpp"
#include "mba/instance.hpp"
#include "mba/rational.hpp"

namespace mba {

using Json = nlohmann::ordered_json;

inline Json rational_json(const Rational& r) { return r.str(); }

inline Rational rational_from_json(const Json& v, const char* what) {
  try {
    if (v.is_string()) return Rational::parse(v.get<std::string>());
    if (v.is_number_integer()) return Rational::parse(v.dump());
  } catch (const std::invalid_argument& e) {
    throw ValidationError(std::string("bad rational for ") + what + ": " + e.what());
  }
  throw ValidationError(std::string("expected rational string for ") + what);
}

namespace detail {

inline const Json& require_field(const Json& obj, const char* key) {
  if (!obj.is_object()) throw ValidationError("expected JSON object");
  auto it = obj.find(key);
  if (it == obj.end()) throw ValidationError(std::string("missing field: ") + key);
  return *it;
}

inline std::string require_string(const Json& obj, const char* key) {
  const Json& v = require_field(obj, key);
  if (!v.is_string()) throw ValidationError(std::string("field must be a string: ") + key);
  return v.get<std::string>();
}

}  // namespace detail

inline Json instance_to_json(const Instance& inst) {
  Json out;
  Json players = Json::array();
  for (std::size_t i = 0; i < inst.num_players(); ++i) {
    players.push_back(Json{{"id", inst.player_id(i)}, {"budget", rational_json(inst.budget(i))}});
  }
  Json items = Json::array();
  for (std::size_t j = 0; j < inst.num_items(); ++j) items.push_back(inst.item_id(j));
  Json prices = Json::array();
  for (std::size_t i = 0; i < inst.num_players(); ++i) {
    for (std::size_t j : inst.player_support(i)) {
      prices.push_back(
          Json{{"player", inst.player_id(i)}, {"item", inst.item_id(j)}, {"price", rational_json(inst.price(i, j))}});
    }
  }
  out["players"] = std::move(players);
  out["items"] = std::move(items);
  out["prices"] = std::move(prices);
  return out;
}

inline Instance instance_from_json(const Json& doc, std::vector<std::string>* warnings = nullptr) {
  InstanceBuilder b;
  std::unordered_map<std::string, std::size_t> pidx;
  std::unordered_map<std::string, std::size_t> iidx;
  const Json& players = detail::require_field(doc, "players");
  const Json& items = detail::require_field(doc, "items");
  if (!players.is_array() || !items.is_array()) throw ValidationError("players and items must be arrays");
  for (const Json& p : players) {
    std::string id = detail::require_string(p, "id");
    Rational budget = rational_from_json(detail::require_field(p, "budget"), "budget");
    pidx.emplace(id, b.add_player(id, budget));
  }
  for (const Json& it : items) {
    if (!it.is_string()) throw ValidationError("item ids must be strings");
    std::string id = it.get<std::string>();
    iidx.emplace(id, b.add_item(id));
  }
  auto pr = doc.find("prices");
  if (pr != doc.end()) {
    if (!pr->is_array()) throw ValidationError("prices must be an array");
    for (const Json& e : *pr) {
      std::string player = detail::require_string(e, "player");
      std::string item = detail::require_string(e, "item");
      auto pi = pidx.find(player);
      if (pi == pidx.end()) throw ValidationError("price references unknown player: " + player);
      auto ii = iidx.find(item);
      if (ii == iidx.end()) throw ValidationError("price references unknown item: " + item);
      b.set_price(pi->second, ii->second, rational_from_json(detail::require_field(e, "price"), "price"));
    }
  }
  return b.build(warnings);
}

inline Instance read_instance(std::istream& in, std::vector<std::string>* warnings = nullptr) {
  Json doc;
  try {
    doc = Json::parse(in);
  } catch (const Json::parse_error& e) {
    throw ValidationError(std::string("malformed JSON: ") + e.what());
  }
  return instance_from_json(doc, warnings);
}

/// {"item": "player", ...} for assigned items, in item order.
inline Json assignment_to_json(const Instance& inst, const Assignment& a) {
  Json out = Json::object();
  for (std::size_t j = 0; j < a.num_items(); ++j) {
    if (a.owner(j)) out[inst.item_id(j)] = inst.player_id(*a.owner(j));
  }
  return out;
}

inline Assignment assignment_from_json(const Instance& inst, const Json& doc) {
  if (!doc.is_object()) throw ValidationError("assignment must be an object");
  Assignment a(inst.num_items());
  for (const auto& [item, player] : doc.items()) {
    if (!player.is_string()) throw ValidationError("assignment values must be player ids");
    a.assign(inst.require_item(item), inst.require_player(player.get<std::string>()));
  }
  return a;
}

/// Nonzero entries as [{"player","item","x"}].
inline Json fractional_to_json(const Instance& inst, const FractionalAssignment& x) {
  Json out = Json::array();
  for (std::size_t i = 0; i < x.num_players(); ++i) {
    for (std::size_t j = 0; j < x.num_items(); ++j) {
      if (!x.at(i, j).is_zero()) {
        out.push_back(Json{{"player", inst.player_id(i)}, {"item", inst.item_id(j)}, {"x", rational_json(x.at(i, j))}});
      }
    }
  }
  return out;
}

inline Json configuration_to_json(const Instance& inst, const ConfigurationSolution& y) {
  Json out = Json::array();
  for (const auto& [key, w] : y.entries()) {
    Json items = Json::array();
    for (std::size_t j : key.items) items.push_back(inst.item_id(j));
    out.push_back(Json{{"player", inst.player_id(key.player)}, {"items", std::move(items)}, {"y", rational_json(w)}});
  }
  return out;
}

inline ConfigurationSolution configuration_from_json(const Instance& inst, const Json& doc) {
  if (!doc.is_array()) throw ValidationError("configuration solution must be an array");
  ConfigurationSolution y;
  for (const Json& e : doc) {
    std::size_t i = inst.require_player(detail::require_string(e, "player"));
    const Json& items = detail::require_field(e, "items");
    if (!items.is_array()) throw ValidationError("configuration items must be an array");
    std::vector<std::size_t> c;
    for (const Json& it : items) {
      if (!it.is_string()) throw ValidationError("item ids must be strings");
      c.push_back(inst.require_item(it.get<std::string>()));
    }
    y.add(i, std::move(c), rational_from_json(detail::require_field(e, "y"), "y"));
  }
  y.validate(inst);
  return y;
}

}  // namespace mba
