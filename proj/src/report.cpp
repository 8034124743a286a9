#include <fmt/format.h>

#include "safefirst/analysis.hpp"

namespace safefirst {

using nlohmann::json;

namespace {

json frequencies_to_json(const FrequencyTable& t) {
  json rows = json::array();
  for (const auto& r : t.rows) rows.push_back({{"action", r.action}, {"count", r.count}, {"percent", r.percent}});
  return {{"rows", rows}, {"total", t.total}, {"total_percent", t.total_percent}};
}

FrequencyTable frequencies_from_json(const json& j) {
  FrequencyTable t;
  for (const auto& r : j.at("rows")) {
    t.rows.push_back({r.at("action").get<Action>(), r.at("count").get<std::size_t>(),
                      r.at("percent").get<double>()});
  }
  t.total = j.at("total").get<std::size_t>();
  t.total_percent = j.at("total_percent").get<double>();
  return t;
}

json overlap_to_json(const OverlapDiagnostics& o) {
  json per_action = json::array();
  for (const auto& s : o.per_action) {
    per_action.push_back({{"min", s.min}, {"q05", s.q05}, {"q25", s.q25}, {"median", s.median},
                          {"q75", s.q75}, {"q95", s.q95}, {"max", s.max}});
  }
  return {{"per_action", per_action}, {"violation_count", o.violation_count},
          {"threshold", o.threshold}, {"n", o.n}};
}

OverlapDiagnostics overlap_from_json(const json& j) {
  OverlapDiagnostics o;
  for (const auto& s : j.at("per_action")) {
    o.per_action.push_back({s.at("min").get<double>(), s.at("q05").get<double>(),
                            s.at("q25").get<double>(), s.at("median").get<double>(),
                            s.at("q75").get<double>(), s.at("q95").get<double>(),
                            s.at("max").get<double>()});
  }
  o.violation_count = j.at("violation_count").get<std::size_t>();
  o.threshold = j.at("threshold").get<double>();
  o.n = j.at("n").get<std::size_t>();
  return o;
}

std::string with_commas(std::size_t v) {
  auto digits = std::to_string(v);
  for (auto pos = static_cast<std::ptrdiff_t>(digits.size()) - 3; pos > 0; pos -= 3) {
    digits.insert(static_cast<std::size_t>(pos), ",");
  }
  return digits;
}

std::string criterion_label(const RiskCriterion& c) {
  switch (c.kind()) {
    case CriterionKind::Neutral: return "Risk-neutral";
    case CriterionKind::LinearRA: return "Risk-averse linear";
    case CriterionKind::QuadraticRA: return "Risk-averse quadratic";
    case CriterionKind::SafetyFirst:
      return fmt::format("Safety-first (y* = {}, {} family)", format_number(c.y_star()),
                         c.family()->name());
  }
  return "";
}

std::string join(const std::vector<std::string>& items, std::string_view sep) {
  std::string out;
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (i > 0) out += sep;
    out += items[i];
  }
  return out;
}

}  // namespace

json criterion_to_json(const RiskCriterion& c) {
  json j{{"kind", std::string(to_string(c.kind()))}};
  if (c.kind() == CriterionKind::SafetyFirst) {
    j["y_star"] = c.y_star();
    json family{{"name", c.family()->name()}};
    if (c.family()->is_tabulated()) {
      family["knots"] = c.family()->knots();
      family["cdf"] = c.family()->knot_cdf();
    }
    j["family"] = family;
  }
  return j;
}

RiskCriterion criterion_from_json(const json& j) {
  const auto kind = criterion_kind_from_string(j.at("kind").get<std::string>());
  if (kind != CriterionKind::SafetyFirst) return RiskCriterion::make(kind);
  const auto& f = j.at("family");
  const auto name = f.at("name").get<std::string>();
  auto family = f.contains("knots")
                    ? LocationScaleFamily::tabulated(name, f.at("knots").get<std::vector<double>>(),
                                                     f.at("cdf").get<std::vector<double>>())
                    : LocationScaleFamily::from_name(name);
  return RiskCriterion::safety_first(j.at("y_star").get<double>(), std::move(family));
}

json report_to_json(const EvaluationReport& r, const ReportContext& ctx) {
  json j;
  j["criterion"] = criterion_to_json(r.criterion);
  j["data_information"] = {{"training_observations", ctx.training_n},
                           {"used_training_observations_optimal", r.n_used},
                           {"used_training_observations_non_optimal", nullptr},
                           {"new_observations", 0},
                           {"used_new_observations_optimal", 0},
                           {"used_new_observations_non_optimal", nullptr}};
  j["policy_information"] = {{"target", ctx.target},
                             {"features", ctx.features},
                             {"policy_variable", ctx.policy_variable},
                             {"num_actions", ctx.num_actions}};
  j["action_frequencies"] = frequencies_to_json(r.action_frequencies);
  j["optimal_action_frequencies"] = frequencies_to_json(r.optimal_action_frequencies);
  j["training_results"] = {{"value_actual", r.value_actual},
                           {"value_non_optimal", nullptr},
                           {"value_optimal", r.value_optimal},
                           {"match_rate", r.match_rate},
                           {"regret_vs_first_best", r.regret_vs_first_best},
                           {"return_variance_actual", r.return_variance_actual},
                           {"return_variance_optimal", r.return_variance_optimal},
                           {"tie_count", r.tie_count},
                           {"floored_count", r.floored_count}};
  j["new_data_results"] = {{"value_non_optimal", nullptr}, {"value_optimal", nullptr}};
  j["overlap"] = ctx.overlap ? overlap_to_json(*ctx.overlap) : json(nullptr);
  j["propensity_converged"] = ctx.propensity_converged;
  return j;
}

EvaluationReport report_from_json(const json& j) {
  try {
    EvaluationReport r;
    r.criterion = criterion_from_json(j.at("criterion"));
    const auto& t = j.at("training_results");
    r.value_actual = t.at("value_actual").get<double>();
    r.value_optimal = t.at("value_optimal").get<double>();
    r.match_rate = t.at("match_rate").get<double>();
    r.regret_vs_first_best = t.at("regret_vs_first_best").get<double>();
    r.return_variance_actual = t.at("return_variance_actual").get<double>();
    r.return_variance_optimal = t.at("return_variance_optimal").get<double>();
    r.tie_count = t.at("tie_count").get<std::size_t>();
    r.floored_count = t.at("floored_count").get<std::size_t>();
    r.action_frequencies = frequencies_from_json(j.at("action_frequencies"));
    r.optimal_action_frequencies = frequencies_from_json(j.at("optimal_action_frequencies"));
    r.n_used = j.at("data_information").at("used_training_observations_optimal").get<std::size_t>();
    return r;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ParseError, std::string("malformed report JSON: ") + e.what());
  }
}

ReportContext context_from_json(const json& j) {
  try {
    ReportContext ctx;
    ctx.training_n = j.at("data_information").at("training_observations").get<std::size_t>();
    const auto& p = j.at("policy_information");
    ctx.target = p.at("target").get<std::string>();
    ctx.features = p.at("features").get<std::vector<std::string>>();
    ctx.policy_variable = p.at("policy_variable").get<std::string>();
    ctx.num_actions = p.at("num_actions").get<int>();
    if (!j.at("overlap").is_null()) ctx.overlap = overlap_from_json(j.at("overlap"));
    ctx.propensity_converged = j.at("propensity_converged").get<bool>();
    return ctx;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ParseError, std::string("malformed report JSON: ") + e.what());
  }
}

std::string render_report_text(const EvaluationReport& r, const ReportContext& ctx) {
  const std::string rule(72, '-');
  std::string out;
  auto line = [&out](const std::string& s) { out += s + "\n"; };
  auto row = [&](std::string_view label, std::string_view sep, const std::string& value) {
    line(fmt::format("{:<58}{} {}", label, sep, value));
  };
  auto section = [&](std::string_view title) {
    line(rule);
    line(std::string(title));
    line(rule);
  };
  auto num = [](double v) { return fmt::format("{:.4f}", v); };

  line(fmt::format("Main Results: {}", criterion_label(r.criterion)));
  section("Data Information");
  row("Number of training observations", "=", with_commas(ctx.training_n));
  row("Number of used training observations (optimal policy)", "=", with_commas(r.n_used));
  row("Number of used training observations (non-optimal policy)", "=", ".");
  row("Number of new observations", "=", "0");
  row("Number of used new observations (optimal policy)", "=", "0");
  row("Number of used new observations (non-optimal policy)", "=", ".");

  section("Policy Information");
  row("Target variable", ":", ctx.target);
  row("Features", ":", join(ctx.features, ", "));
  row("Policy variable", ":", ctx.policy_variable);
  row("Number of actions", "=", std::to_string(ctx.num_actions));
  std::vector<std::string> labels;
  for (int a = 0; a < ctx.num_actions; ++a) labels.push_back(std::to_string(a));
  row("Actions", "=", "{" + join(labels, ", ") + "}");
  row("Risk criterion", ":", criterion_label(r.criterion));

  auto frequencies = [&](const FrequencyTable& t) {
    for (const auto& f : t.rows) {
      line(fmt::format("Action {:<3} Freq. = {:>10}   Percent = {:>6.2f}", f.action,
                       with_commas(f.count), f.percent));
    }
    line(fmt::format("{:<10} Freq. = {:>10}   Percent = {:>6.2f}", "Total", with_commas(t.total),
                     t.total_percent));
  };
  section("Frequencies of the actions (training data)");
  frequencies(r.action_frequencies);

  section("Training Data Results");
  row("Value-function of the policy (training)", "=", num(r.value_actual));
  row("Value-function of the non-optimal policy", "=", ".");
  row("Value-function of the optimal policy (training)", "=", num(r.value_optimal));
  row("Rate of optimal policy matches", "=", fmt::format("{:.2f}", r.match_rate));
  row("Regret vs first-best (risk-neutral value)", "=", num(r.regret_vs_first_best));
  row("Return variance of the policy (training)", "=", num(r.return_variance_actual));
  row("Return variance of the optimal policy (training)", "=", num(r.return_variance_optimal));
  row("Units with tied optimal actions", "=", with_commas(r.tie_count));
  row("Floored variance predictions", "=", with_commas(r.floored_count));

  section("New Data Results");
  row("Value-function of the non-optimal policy (new)", "=", ".");
  row("Value-function of the optimal policy (new)", "=", ".");

  section("Frequencies of the optimal actions (training data)");
  frequencies(r.optimal_action_frequencies);

  if (ctx.overlap) {
    const auto& o = *ctx.overlap;
    section("Overlap Diagnostics (multinomial logit propensity)");
    row("Propensity fit converged", ":", ctx.propensity_converged ? "yes" : "no");
    row("Threshold", "=", fmt::format("{}", format_number(o.threshold)));
    row("Units with a propensity below threshold", "=", with_commas(o.violation_count));
    for (std::size_t a = 0; a < o.per_action.size(); ++a) {
      const auto& s = o.per_action[a];
      line(fmt::format("Action {:<3} min {:.4f}  q05 {:.4f}  median {:.4f}  q95 {:.4f}  max {:.4f}", a,
                       s.min, s.q05, s.median, s.q95, s.max));
    }
  }
  line(rule);
  return out;
}

json simulation_to_json(const MonteCarloSummary& s) {
  json reps = json::array();
  for (const auto& r : s.replications) {
    reps.push_back({{"welfare_rn", r.welfare_rn},
                    {"welfare_ra", r.welfare_ra},
                    {"welfare_oracle", r.welfare_oracle},
                    {"oracle_treated_share", r.oracle_treated_share},
                    {"rn_treated_below_mean", r.rn_treated_below_mean},
                    {"oracle_treated_below_mean", r.oracle_treated_below_mean}});
  }
  auto welfare = [](const PolicyWelfare& w) {
    return json{{"mean", w.mean}, {"standard_error", w.standard_error}};
  };
  return {{"params",
           {{"mu0", s.params.mu0},
            {"mu1", s.params.mu1},
            {"sigma0", s.params.sigma0},
            {"sigma1", s.params.sigma1},
            {"n", s.params.n},
            {"seed", s.params.seed}}},
          {"reps", s.reps},
          {"rn_treats", s.rn_treats},
          {"ra_treats", s.ra_treats},
          {"welfare", {{"rn", welfare(s.rn)}, {"ra", welfare(s.ra)}, {"oracle", welfare(s.oracle)}}},
          {"closed_form",
           {{"rn", s.closed_form_rn_welfare},
            {"ra", s.closed_form_ra_welfare},
            {"oracle", s.closed_form_oracle_welfare}}},
          {"replications", reps}};
}

std::string render_simulation_text(const MonteCarloSummary& s) {
  std::string out;
  out += fmt::format("Two-arm simulation: mu0 = {}, mu1 = {}, sigma0 = {}, sigma1 = {}, n = {}, reps = {}, seed = {}\n",
                     format_number(s.params.mu0), format_number(s.params.mu1),
                     format_number(s.params.sigma0), format_number(s.params.sigma1), s.params.n,
                     s.reps, s.params.seed);
  out += fmt::format("Risk-neutral rule treats: {}\n", s.rn_treats ? "all" : "none");
  out += fmt::format("Risk-averse rule treats:  {}\n", s.ra_treats ? "all" : "none");
  out += fmt::format("{:<8} {:>12} {:>10} {:>12}\n", "policy", "mean W", "s.e.", "expected");
  out += fmt::format("{:<8} {:>12.4f} {:>10.4f} {:>12.4f}\n", "RN", s.rn.mean, s.rn.standard_error,
                     s.closed_form_rn_welfare);
  out += fmt::format("{:<8} {:>12.4f} {:>10.4f} {:>12.4f}\n", "RA", s.ra.mean, s.ra.standard_error,
                     s.closed_form_ra_welfare);
  out += fmt::format("{:<8} {:>12.4f} {:>10.4f} {:>12.4f}\n", "OR", s.oracle.mean,
                     s.oracle.standard_error, s.closed_form_oracle_welfare);
  return out;
}

}  // namespace safefirst
