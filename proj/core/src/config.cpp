/*
 * Copyright 2026 The spatialbench Authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 *
 * SPDX-License-Identifier: Apache-2.0
 */

#include "spb/config.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include "spb/error.hpp"

namespace spb {

using nlohmann::json;

// ------------------------------------------------------------------ methods

std::string to_string(Method m) {
  switch (m) {
    case Method::TSK: return "TSK";
    case Method::SSP: return "SSP";
    case Method::EDW: return "EDW";
    case Method::FRK: return "FRK";
    case Method::MPP: return "MPP";
    case Method::SPD: return "SPD";
    case Method::LTK: return "LTK";
  }
  return "?";
}

Method parse_method(const std::string& tag) {
  std::string t;
  for (char c : tag)
    if (!std::isspace(static_cast<unsigned char>(c))) t += static_cast<char>(std::toupper(c));
  for (Method m : kAllMethods)
    if (to_string(m) == t) return m;
  throw ConfigError("unknown method '" + tag + "' (expected TSK, SSP, EDW, FRK, MPP, SPD, LTK)");
}

std::vector<Method> parse_method_list(const std::string& csv) {
  std::string lower = csv;
  std::transform(lower.begin(), lower.end(), lower.begin(), ::tolower);
  if (lower == "all") return {std::begin(kAllMethods), std::end(kAllMethods)};
  std::vector<Method> out;
  std::stringstream ss(csv);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const Method m = parse_method(item);
    if (std::find(out.begin(), out.end(), m) != out.end())
      throw ConfigError("method '" + to_string(m) + "' listed twice");
    out.push_back(m);
  }
  if (out.empty()) throw ConfigError("empty method list");
  return out;
}

bool has_variance(Method m) { return m != Method::EDW && m != Method::SSP; }

// ------------------------------------------------------------------ strict reader

namespace {

class Fields {
 public:
  Fields(const json& j, std::string ctx) : j_(j), ctx_(std::move(ctx)) {
    if (!j_.is_object()) throw ConfigError(ctx_ + ": expected an object");
  }

  template <class T>
  void get(const char* key, T& out) {
    seen_.insert(key);
    if (!j_.contains(key)) return;
    try {
      out = j_.at(key).get<T>();
    } catch (const json::exception& e) {
      throw ConfigError(ctx_ + "." + key + ": " + e.what());
    }
  }

  const json* sub(const char* key) {
    seen_.insert(key);
    return j_.contains(key) ? &j_.at(key) : nullptr;
  }

  void done() const {
    for (const auto& [k, v] : j_.items())
      if (!seen_.count(k)) throw ConfigError(ctx_ + ": unknown key '" + k + "'");
  }

 private:
  const json& j_;
  std::string ctx_;
  std::set<std::string> seen_;
};

json opt_json(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

void read_opt(Fields& f, const char* key, std::optional<double>& out) {
  if (const json* v = f.sub(key)) {
    if (v->is_null()) out.reset();
    else if (v->is_number()) out = v->get<double>();
    else throw ConfigError(std::string(key) + ": expected a number or null");
  }
}

json box_json(const BoundingBox& b) {
  return {{"lon_min", b.lon_min}, {"lat_min", b.lat_min}, {"lon_max", b.lon_max},
          {"lat_max", b.lat_max}};
}

BoundingBox box_from(const json& j, const std::string& ctx) {
  Fields f(j, ctx);
  BoundingBox b;
  f.get("lon_min", b.lon_min);
  f.get("lat_min", b.lat_min);
  f.get("lon_max", b.lon_max);
  f.get("lat_max", b.lat_max);
  f.done();
  return b;
}

}  // namespace

// ------------------------------------------------------------------ FitConfig

void FitConfig::validate() const {
  if (!(sigma_eps_sq >= 0.0)) throw ConfigError("sigma_eps_sq must be >= 0");
  if (!(edw_theta > 0.0)) throw ConfigError("edw_theta must be > 0");
  if (frk.levels.empty()) throw ConfigError("frk.levels must not be empty");
  for (const auto& [nx, ny] : frk.levels)
    if (nx < 1 || ny < 1) throw ConfigError("frk.levels entries must be >= 1");
  if (!(frk.width_factor > 0.0)) throw ConfigError("frk.width_factor must be > 0");
  if (mpp.knots_nx < 1 || mpp.knots_ny < 1) throw ConfigError("mpp knot grid must be >= 1x1");
  if (mpp.chain.chain_length < 1 || mpp.chain.burn_in < 0 || mpp.chain.thin < 1)
    throw ConfigError("mpp chain settings invalid");
  if (mpp.max_prediction_draws < 1) throw ConfigError("mpp.max_prediction_draws must be >= 1");
  if (mpp.priors) mpp.priors->validate();
  if (spd.min_nodes < 4 || spd.max_nodes < spd.min_nodes || !(spd.nodes_per_point > 0.0) ||
      !(spd.margin_fraction >= 0.0))
    throw ConfigError("spd mesh settings invalid");
  if (ltk.min_nodes < 4 || ltk.max_nodes < ltk.min_nodes || !(ltk.nodes_per_point > 0.0) ||
      ltk.margin_cells < 0 || !(ltk.radius_factor > 0.0))
    throw ConfigError("ltk lattice settings invalid");
  (void)ssp.candidates();
  if (domain && !(domain->lon_max > domain->lon_min && domain->lat_max > domain->lat_min))
    throw ConfigError("domain must have positive width and height");
}

void to_json(json& j, const FitConfig& c) {
  json levels = json::array();
  for (const auto& [nx, ny] : c.frk.levels) levels.push_back({nx, ny});
  json priors = nullptr;
  if (c.mpp.priors) {
    const auto& p = *c.mpp.priors;
    priors = {{"a_eta", p.a_eta}, {"b_eta", p.b_eta},     {"a_kappa", p.a_kappa},
              {"b_kappa", p.b_kappa}, {"a_eps", p.a_eps}, {"b_eps", p.b_eps}};
  }
  j = json{
      {"trend", c.trend.names()},
      {"sigma_eps_sq", c.sigma_eps_sq},
      {"edw_theta", c.edw_theta},
      {"domain", c.domain ? box_json(*c.domain) : json(nullptr)},
      {"tsk", {{"max_n", c.tsk.max_n}, {"max_evaluations", c.tsk.max_evaluations}}},
      {"ssp",
       {{"max_n", c.ssp.max_n},
        {"grid_min", c.ssp.grid_min},
        {"grid_max", c.ssp.grid_max},
        {"grid_size", c.ssp.grid_size},
        {"grid", c.ssp.grid}}},
      {"frk",
       {{"levels", levels},
        {"width_factor", c.frk.width_factor},
        {"max_iterations", c.frk.em.max_iterations},
        {"tolerance", c.frk.em.tolerance}}},
      {"mpp",
       {{"knots_nx", c.mpp.knots_nx},
        {"knots_ny", c.mpp.knots_ny},
        {"chain_length", c.mpp.chain.chain_length},
        {"burn_in", c.mpp.chain.burn_in},
        {"thin", c.mpp.chain.thin},
        {"seed", c.mpp.chain.seed},
        {"proposal_sd", c.mpp.chain.proposal_sd},
        {"max_prediction_draws", c.mpp.max_prediction_draws},
        {"priors", priors}}},
      {"spd",
       {{"margin_fraction", c.spd.margin_fraction},
        {"nodes_per_point", c.spd.nodes_per_point},
        {"min_nodes", c.spd.min_nodes},
        {"max_nodes", c.spd.max_nodes},
        {"kappa_grid", c.spd.search.kappa_grid},
        {"ratio_grid", c.spd.search.ratio_grid},
        {"ratio_min", c.spd.search.ratio_min},
        {"ratio_max", c.spd.search.ratio_max},
        {"max_evaluations", c.spd.search.max_evaluations}}},
      {"ltk",
       {{"radius_factor", c.ltk.radius_factor},
        {"margin_cells", c.ltk.margin_cells},
        {"nodes_per_point", c.ltk.nodes_per_point},
        {"min_nodes", c.ltk.min_nodes},
        {"max_nodes", c.ltk.max_nodes},
        {"kappa_min", c.ltk.search.kappa_min},
        {"kappa_max", c.ltk.search.kappa_max},
        {"kappa_grid", c.ltk.search.kappa_grid},
        {"sigma_grid", c.ltk.search.sigma_grid},
        {"max_evaluations", c.ltk.search.max_evaluations}}},
  };
}

void from_json(const json& j, FitConfig& c) {
  Fields f(j, "fit");
  if (const json* t = f.sub("trend")) {
    try {
      c.trend = TrendSpec::from_names(t->get<std::vector<std::string>>());
    } catch (const json::exception& e) {
      throw ConfigError(std::string("fit.trend: ") + e.what());
    }
  }
  f.get("sigma_eps_sq", c.sigma_eps_sq);
  f.get("edw_theta", c.edw_theta);
  if (const json* d = f.sub("domain")) {
    if (d->is_null()) c.domain.reset();
    else c.domain = box_from(*d, "fit.domain");
  }
  if (const json* s = f.sub("tsk")) {
    Fields g(*s, "fit.tsk");
    g.get("max_n", c.tsk.max_n);
    g.get("max_evaluations", c.tsk.max_evaluations);
    g.done();
  }
  if (const json* s = f.sub("ssp")) {
    Fields g(*s, "fit.ssp");
    g.get("max_n", c.ssp.max_n);
    g.get("grid_min", c.ssp.grid_min);
    g.get("grid_max", c.ssp.grid_max);
    g.get("grid_size", c.ssp.grid_size);
    g.get("grid", c.ssp.grid);
    g.done();
  }
  if (const json* s = f.sub("frk")) {
    Fields g(*s, "fit.frk");
    if (const json* l = g.sub("levels")) {
      c.frk.levels.clear();
      for (const auto& e : *l) {
        if (!e.is_array() || e.size() != 2) throw ConfigError("fit.frk.levels: expected [nx, ny] pairs");
        c.frk.levels.emplace_back(e[0].get<int>(), e[1].get<int>());
      }
    }
    g.get("width_factor", c.frk.width_factor);
    g.get("max_iterations", c.frk.em.max_iterations);
    g.get("tolerance", c.frk.em.tolerance);
    g.done();
  }
  if (const json* s = f.sub("mpp")) {
    Fields g(*s, "fit.mpp");
    g.get("knots_nx", c.mpp.knots_nx);
    g.get("knots_ny", c.mpp.knots_ny);
    g.get("chain_length", c.mpp.chain.chain_length);
    g.get("burn_in", c.mpp.chain.burn_in);
    g.get("thin", c.mpp.chain.thin);
    g.get("seed", c.mpp.chain.seed);
    g.get("proposal_sd", c.mpp.chain.proposal_sd);
    g.get("max_prediction_draws", c.mpp.max_prediction_draws);
    if (const json* p = g.sub("priors")) {
      if (p->is_null()) {
        c.mpp.priors.reset();
      } else {
        MppPriors pr;
        Fields h(*p, "fit.mpp.priors");
        h.get("a_eta", pr.a_eta);
        h.get("b_eta", pr.b_eta);
        h.get("a_kappa", pr.a_kappa);
        h.get("b_kappa", pr.b_kappa);
        h.get("a_eps", pr.a_eps);
        h.get("b_eps", pr.b_eps);
        h.done();
        c.mpp.priors = pr;
      }
    }
    g.done();
  }
  if (const json* s = f.sub("spd")) {
    Fields g(*s, "fit.spd");
    g.get("margin_fraction", c.spd.margin_fraction);
    g.get("nodes_per_point", c.spd.nodes_per_point);
    g.get("min_nodes", c.spd.min_nodes);
    g.get("max_nodes", c.spd.max_nodes);
    g.get("kappa_grid", c.spd.search.kappa_grid);
    g.get("ratio_grid", c.spd.search.ratio_grid);
    g.get("ratio_min", c.spd.search.ratio_min);
    g.get("ratio_max", c.spd.search.ratio_max);
    g.get("max_evaluations", c.spd.search.max_evaluations);
    g.done();
  }
  if (const json* s = f.sub("ltk")) {
    Fields g(*s, "fit.ltk");
    g.get("radius_factor", c.ltk.radius_factor);
    g.get("margin_cells", c.ltk.margin_cells);
    g.get("nodes_per_point", c.ltk.nodes_per_point);
    g.get("min_nodes", c.ltk.min_nodes);
    g.get("max_nodes", c.ltk.max_nodes);
    g.get("kappa_min", c.ltk.search.kappa_min);
    g.get("kappa_max", c.ltk.search.kappa_max);
    g.get("kappa_grid", c.ltk.search.kappa_grid);
    g.get("sigma_grid", c.ltk.search.sigma_grid);
    g.get("max_evaluations", c.ltk.search.max_evaluations);
    g.done();
  }
  f.done();
  c.validate();
}

// ------------------------------------------------------------------ RunConfig

void RunConfig::validate() const {
  if (methods.empty()) throw ConfigError("no methods selected");
  if (!(split_fraction > 0.0 && split_fraction < 1.0))
    throw ConfigError("split_fraction must lie in (0, 1)");
  if (raster) raster->validate();
  if (!(raster_step > 0.0)) throw ConfigError("raster_step must be > 0");
  if (lag_unit && !(*lag_unit > 0.0)) throw ConfigError("lag_unit must be > 0");
  if (!(lag_tol >= 0.0)) throw ConfigError("lag_tol must be >= 0");
  simulation.validate();
  fit.validate();
}

void to_json(json& j, const RunConfig& c) {
  std::vector<std::string> methods;
  for (Method m : c.methods) methods.push_back(to_string(m));
  j = json{{"data", c.data},
           {"validation", c.validation},
           {"model", c.model},
           {"locations", c.locations},
           {"methods", methods},
           {"split_fraction", c.split_fraction},
           {"seed", c.seed},
           {"raster", c.raster ? json(c.raster->to_string()) : json(nullptr)},
           {"raster_step", c.raster_step},
           {"lag_unit", opt_json(c.lag_unit)},
           {"lag_tol", c.lag_tol},
           {"pmcc_sign", to_string(c.pmcc_sign)},
           {"out", c.out},
           {"simulation", c.simulation},
           {"fit", c.fit}};
}

void from_json(const json& j, RunConfig& c) {
  Fields f(j, "config");
  f.get("data", c.data);
  f.get("validation", c.validation);
  f.get("model", c.model);
  f.get("locations", c.locations);
  if (const json* m = f.sub("methods")) {
    c.methods.clear();
    for (const auto& e : *m) c.methods.push_back(parse_method(e.get<std::string>()));
  }
  f.get("split_fraction", c.split_fraction);
  f.get("seed", c.seed);
  if (const json* r = f.sub("raster")) {
    if (r->is_null()) c.raster.reset();
    else c.raster = RasterSpec::from_json(*r);
  }
  f.get("raster_step", c.raster_step);
  read_opt(f, "lag_unit", c.lag_unit);
  f.get("lag_tol", c.lag_tol);
  if (const json* s = f.sub("pmcc_sign")) c.pmcc_sign = parse_pmcc_sign(s->get<std::string>());
  f.get("out", c.out);
  if (const json* s = f.sub("simulation")) {
    try {
      c.simulation = s->get<SimulationConfig>();
    } catch (const json::exception& e) {
      throw ConfigError(std::string("simulation: ") + e.what());
    }
  }
  if (const json* s = f.sub("fit")) from_json(*s, c.fit);
  f.done();
  c.validate();
}

RunConfig load_run_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  json j;
  try {
    j = json::parse(in, nullptr, true, /*ignore_comments=*/true);
  } catch (const json::parse_error& e) {
    throw ConfigError("config '" + path + "': " + e.what());
  }
  RunConfig c;
  from_json(j, c);
  return c;
}

std::uint64_t config_hash(const json& j) {
  const std::string s = j.dump();
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char ch : s) {
    h ^= ch;
    h *= 1099511628211ull;
  }
  return h;
}

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

}  // namespace spb
