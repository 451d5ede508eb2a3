#include "circlekms/report.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>

namespace circlekms {

namespace {

Json optional_rational(const std::optional<Rational>& r) { return r ? to_json(*r) : Json(nullptr); }

Json class_field(const CriticalCatalog& catalog, std::size_t i) {
  const auto c = catalog.class_of(i);
  return c ? Json(*c) : Json(nullptr);
}

void dump(const Json& j, int indent, std::string& out) {
  const std::string pad(static_cast<std::size_t>(indent) * 2, ' ');
  const std::string inner(static_cast<std::size_t>(indent + 1) * 2, ' ');
  switch (j.type()) {
    case Json::value_t::object: {
      if (j.empty()) {
        out += "{}";
        return;
      }
      // small scalar objects (rationals, witnesses) stay on one line
      bool flat = j.size() <= 4;
      for (const auto& x : j) flat = flat && !x.is_structured();
      if (flat) {
        out += "{";
        bool first = true;
        for (auto it = j.begin(); it != j.end(); ++it) {
          if (!first) out += ", ";
          first = false;
          out += Json(it.key()).dump() + ": ";
          dump(it.value(), indent + 1, out);
        }
        out += "}";
        return;
      }
      out += "{\n";
      bool first = true;
      for (auto it = j.begin(); it != j.end(); ++it) {
        if (!first) out += ",\n";
        first = false;
        out += inner + Json(it.key()).dump() + ": ";
        dump(it.value(), indent + 1, out);
      }
      out += "\n" + pad + "}";
      return;
    }
    case Json::value_t::array: {
      if (j.empty()) {
        out += "[]";
        return;
      }
      // short scalar arrays stay on one line
      bool flat = j.size() <= 16;
      for (const auto& x : j) {
        flat = flat && (!x.is_structured() || (x.is_object() && x.size() == 2 && x.contains("num")));
      }
      if (flat) {
        out += "[";
        for (std::size_t i = 0; i < j.size(); ++i) {
          if (i) out += ", ";
          dump(j[i], indent + 1, out);
        }
        out += "]";
        return;
      }
      out += "[\n";
      for (std::size_t i = 0; i < j.size(); ++i) {
        if (i) out += ",\n";
        out += inner;
        dump(j[i], indent + 1, out);
      }
      out += "\n" + pad + "]";
      return;
    }
    case Json::value_t::number_float: {
      const double x = j.get<double>();
      if (!std::isfinite(x)) {
        out += "null";
        return;
      }
      char buf[40];
      std::snprintf(buf, sizeof buf, "%.12g", x);
      out += buf;
      return;
    }
    default:
      out += j.dump();
  }
}

}  // namespace

Json to_json(const Rational& r) {
  return Json{{"num", r.get_num().get_str()}, {"den", r.get_den().get_str()}};
}

Rational rational_from_json(const Json& j) {
  if (!j.is_object() || !j.contains("num") || !j.contains("den") || !j["num"].is_string() ||
      !j["den"].is_string()) {
    throw ValidationError("expected {\"num\": string, \"den\": string}");
  }
  const auto r = parse_rational(j["num"].get<std::string>() + "/" + j["den"].get<std::string>());
  if (!r) throw ValidationError("malformed rational in JSON");
  return *r;
}

Json map_json(const CircleMapPL& map) {
  Json bp = Json::array(), vals = Json::array();
  for (const auto& b : map.breakpoints()) bp.push_back(to_json(b));
  for (const auto& v : map.values()) vals.push_back(to_json(v));
  return Json{{"breakpoints", bp},
              {"values", vals},
              {"degree", map.degree().get_str()},
              {"assume_exact", map.assume_exact()},
              {"spec", format_map(map)}};
}

Json entropy_json(const EntropyResult& h) {
  Json j;
  j["method"] = to_string(h.method);
  j["exact_form"] = h.exact_form ? Json(*h.exact_form) : Json(nullptr);
  j["exp_entropy"] = optional_rational(h.exp_entropy);
  j["decimal"] = h.decimal;
  j["certified"] = h.certified;
  Json ub = Json::array();
  for (const auto& [n, b] : h.upper_bounds) ub.push_back(Json{{"n", n}, {"bound", b}});
  j["upper_bounds"] = ub;
  Json pc = Json::array();
  for (const auto& [n, p] : h.piece_counts) pc.push_back(Json{{"n", n}, {"pieces", p}});
  j["piece_counts"] = pc;
  j["lower_estimate"] =
      h.lower_estimate ? Json{{"n", h.lower_estimate->first}, {"value", h.lower_estimate->second}} : Json(nullptr);
  j["lower_sample"] = optional_rational(h.lower_sample);
  if (h.markov) {
    Json part = Json::array();
    for (const auto& p : h.markov->partition) part.push_back(to_json(p));
    Json mk{{"partition", part},
            {"radius_lo", to_json(h.markov->radius_lo)},
            {"radius_hi", to_json(h.markov->radius_hi)}};
    if (h.markov->partition.size() <= 64) mk["transition_matrix"] = h.markov->transition_matrix;
    j["markov"] = mk;
  } else {
    j["markov"] = nullptr;
  }
  return j;
}

Json catalog_json(const CriticalCatalog& catalog) {
  Json crit = Json::array();
  for (std::size_t i = 0; i < catalog.critical.size(); ++i) {
    const auto& c = catalog.critical[i];
    Json e{{"position", to_json(c.point.position())},
           {"valency", to_string(c.valency)},
           {"preperiodic", c.preperiodicity.preperiodic()},
           {"terminal", c.terminal},
           {"final", c.final},
           {"class", class_field(catalog, i)}};
    e["preperiod"] = c.preperiodicity.preperiodic()
                         ? Json{c.preperiodicity.first, c.preperiodicity.second}
                         : Json(nullptr);
    e["first_critical_hit"] = c.first_critical_hit ? Json(*c.first_critical_hit) : Json(nullptr);
    crit.push_back(e);
  }
  Json classes = Json::array();
  for (const auto& c : catalog.classes) {
    Json members = Json::array();
    for (std::size_t s = 0; s < c.members.size(); ++s) {
      const auto& w = c.from_base[s];
      members.push_back(Json{{"position", to_json(catalog.critical[c.members[s]].point.position())},
                             {"level", c.level_of(s)},
                             {"final", catalog.critical[c.members[s]].final},
                             {"witness", Json{{"n", w.n}, {"m", w.m}, {"point", to_json(w.common_point.position())}}}});
    }
    classes.push_back(Json{{"base", to_json(catalog.critical[c.base].point.position())}, {"members", members}});
  }
  return Json{{"depth", catalog.depth},
              {"critical_points", crit},
              {"critical_count", catalog.critical.size()},
              {"non_preperiodic_count", catalog.non_preperiodic().size()},
              {"terminal_count", catalog.terminal().size()},
              {"final_count", catalog.final_points().size()},
              {"classes", classes}};
}

Json report_json(const KmsReport& r) {
  Json j;
  j["entropy"] = entropy_json(r.entropy);
  j["catalog"] = catalog_json(r.catalog);
  j["N"] = r.N;
  j["regimes"] = Json{{"below", r.regimes.below}, {"at_h", r.regimes.at_h}, {"above", r.regimes.above}};
  j["summary"] = r.summary;
  j["ground_state_dims"] = Json(r.ground_state_dims);
  if (r.ground_state_dims.empty()) j["ground_state_dims"] = Json::array();
  j["simplicity"] = Json{{"status", to_string(r.simplicity.status)},
                         {"witness", r.simplicity.witness ? to_json(r.simplicity.witness->position()) : Json(nullptr)},
                         {"reason", r.simplicity.reason}};
  j["zero_kms"] = r.zero_kms;
  j["factor_labels"] = Json{{"above_h", r.factor_labels.above_h}, {"at_h", r.factor_labels.at_h}};
  j["exactness"] = to_string(r.exactness);
  j["depth"] = r.certificates_depth;
  j["assume_exact"] = r.assume_exact_echo;
  j["seeds"] = Json{{"entropy_sample", r.seed}};
  return j;
}

Json measure_json(const AtomicMeasure& m) {
  Json cw = Json::array();
  for (const auto& c : m.class_weights) {
    Json counts = Json::array();
    for (const auto& n : c.partition.counts) counts.push_back(n.get_str());
    cw.push_back(Json{{"terminal", to_json(c.point.position())},
                      {"t_exponent", c.t_exponent},
                      {"alpha_weight", to_json(c.alpha_weight)},
                      {"alpha_decimal", c.alpha_weight.get_d()},
                      {"partition",
                       Json{{"counts", counts},
                            {"value", to_json(c.partition.value)},
                            {"tail_bound", optional_rational(c.partition.tail_bound)},
                            {"tail_method", c.partition.tail_method}}}});
  }
  return Json{{"class_index", m.class_index},
              {"q", to_json(m.q)},
              {"beta_decimal", -std::log(m.q.get_d())},
              {"K", m.depth},
              {"atom_count", m.atoms.size()},
              {"normalization", to_json(m.normalization)},
              {"tail_bound", optional_rational(m.tail_bound)},
              {"total_weight", to_json(m.total_weight())},
              {"class_weights", cw}};
}

Json maximal_measure_json(const DistributionApprox& nu) {
  return Json{{"method", nu.method},
              {"exact_lebesgue", nu.exact_lebesgue},
              {"certified", nu.certified},
              {"scale_factor", nu.scale_factor},
              {"max_scaling_residual", nu.max_scaling_residual},
              {"iterations", nu.iterations},
              {"resolution", nu.grid.empty() ? 0 : nu.grid.size() - 1}};
}

Json verification_json(const VerificationReport& v) {
  Json classes = Json::array();
  for (const auto& c : v.classes) {
    classes.push_back(Json{
        {"class_index", c.class_index},
        {"atoms", c.atoms},
        {"kms", Json{{"pairs", c.kms_pairs},
                     {"nonzero", c.kms_nonzero},
                     {"trivial_pairs", c.kms_trivial},
                     {"max_residual", to_json(c.kms_max_residual)},
                     {"exact_zero", c.kms_exact_zero()}}},
        {"conformal", Json{{"bisections", c.bisections},
                           {"arrows", c.bisection_arrows},
                           {"skipped", c.skipped},
                           {"nonzero", c.conformal_nonzero},
                           {"max_residual", to_json(c.conformal_max_residual)},
                           {"exact_zero", c.conformal_exact_zero()}}},
        {"scaling", Json{{"sets", c.scaling.sets},
                         {"atoms_checked", c.scaling.atoms_checked},
                         {"excluded", c.scaling.excluded},
                         {"max_residual", to_json(c.scaling.max_residual)},
                         {"exact_zero", c.scaling_exact_zero()}}},
        {"control", Json{{"kms_residual", to_json(c.control_kms_residual)},
                         {"conformal_residual", to_json(c.control_conformal_residual)},
                         {"detected", c.control_detected()}}}});
  }
  return Json{{"q", to_json(v.q)},
              {"depth", v.depth},
              {"samples", v.samples},
              {"seed", v.seed},
              {"classes", classes},
              {"all_exact_zero", v.all_exact_zero()}};
}

std::string dump_canonical(const Json& j) {
  std::string out;
  dump(j, 0, out);
  out += "\n";
  return out;
}

std::string atoms_csv(const AtomicMeasure& m, const CriticalCatalog& catalog) {
  std::ostringstream os;
  os << "position_p,position_q,level,weight_num,weight_den,via_terminal\n";
  for (const auto& a : m.atoms) {
    const auto& p = a.atom.point.position();
    os << p.get_num().get_str() << ',' << p.get_den().get_str() << ',' << a.atom.level << ','
       << a.weight.get_num().get_str() << ',' << a.weight.get_den().get_str() << ','
       << to_string(catalog.critical[a.atom.via_terminal].point.position()) << '\n';
  }
  return os.str();
}

}  // namespace circlekms
