#include "dr/synth/verification.hpp"

#include <algorithm>
#include <map>
#include <set>

#include <fmt/format.h>

#include "dr/error.hpp"
#include "dr/text.hpp"

namespace dr::synth {

namespace {

struct StageFailure {
  std::string stage;
  std::string message;
};

Json ask_json(ModelClient& model, const std::string& prompt, const std::string& stage) {
  const auto reply = model.complete({{{"user", prompt}}, 4096, 0.0}).text;
  auto j = extract_json(reply);
  if (!j || !j->is_object()) throw StageFailure{stage, "model reply holds no JSON object"};
  return *j;
}

std::string hits_block(const std::vector<retrieval::SearchHit>& hits) {
  std::string s;
  for (const auto& h : hits) s += fmt::format("[{}] {}\n", h.para_id, text::collapse_whitespace(h.snippet));
  return s.empty() ? "(no results)\n" : s;
}

// Searches every query, merging hits by paragraph id in first-seen order.
std::vector<retrieval::SearchHit> gather(retrieval::SearchService& search,
                                         const std::vector<std::string>& queries, std::size_t k) {
  retrieval::SearchParams params;
  params.k = k;
  std::vector<retrieval::SearchHit> out;
  std::set<std::string> seen;
  for (const auto& q : queries) {
    std::vector<retrieval::SearchHit> hits;
    try {
      hits = search.search(q, params);
    } catch (const Error& e) {
      throw StageFailure{"verify", fmt::format("search \"{}\" failed: {}", q, e.what())};
    }
    for (auto& h : hits) {
      if (seen.insert(h.para_id).second) out.push_back(std::move(h));
    }
  }
  return out;
}

void judge_point(VerificationPoint& p, const std::vector<VerificationPoint>& all,
                 retrieval::SearchService& search, ModelClient& model, std::size_t k, Json& log) {
  const auto hits = gather(search, p.queries, k);
  std::string deps;
  for (auto d : p.depends_on) {
    deps += fmt::format("- {} => {}\n", all[d].claim,
                        all[d].conclusion ? to_string(*all[d].conclusion) : "unverified");
  }
  const auto j = ask_json(
      model,
      fmt::format("Claim: {}\n{}Retrieved evidence:\n{}\nCross-check the claim against the evidence. Reply "
                  "with JSON {{\"conclusion\": \"support\"|\"refute\"|\"doubtful\", \"evidence\": "
                  "[paragraph ids]}}.",
                  p.claim, deps.empty() ? "" : "Earlier conclusions:\n" + deps, hits_block(hits)),
      "verify");
  Conclusion c;
  try {
    c = parse_conclusion(j.value("conclusion", std::string{}));
  } catch (const Error& e) {
    throw StageFailure{"verify", e.what()};
  }
  std::set<std::string> retrieved;
  for (const auto& h : hits) retrieved.insert(h.para_id);
  std::vector<std::string> evidence;
  std::vector<std::string> rejected;
  if (auto ev = j.find("evidence"); ev != j.end() && ev->is_array()) {
    for (const auto& e : *ev) {
      if (!e.is_string()) continue;
      const auto key = e.get<std::string>();
      if (retrieved.count(key)) {
        if (std::find(evidence.begin(), evidence.end(), key) == evidence.end()) evidence.push_back(key);
      } else {
        rejected.push_back(key);
      }
    }
  }
  if (c != Conclusion::kDoubtful && evidence.empty()) c = Conclusion::kDoubtful;
  if (evidence.empty()) {
    for (const auto& h : hits) evidence.push_back(h.para_id);
    if (evidence.empty()) {
      for (const auto& q : p.queries) evidence.push_back("search:" + q);
    }
  }
  p.conclusion = c;
  p.evidence = std::move(evidence);
  log.push_back({{"claim", p.claim},
                 {"queries", p.queries},
                 {"retrieved", hits.size()},
                 {"conclusion", to_string(c)},
                 {"evidence", p.evidence},
                 {"rejected_evidence", rejected}});
}

}  // namespace

std::string to_string(Conclusion c) {
  switch (c) {
    case Conclusion::kSupport: return "support";
    case Conclusion::kRefute: return "refute";
    case Conclusion::kDoubtful: return "doubtful";
  }
  return "unknown";
}

Conclusion parse_conclusion(const std::string& s) {
  const auto f = text::fold_case(text::trim(s));
  if (f == "support" || f == "supported") return Conclusion::kSupport;
  if (f == "refute" || f == "refuted") return Conclusion::kRefute;
  if (f == "doubtful") return Conclusion::kDoubtful;
  throw Error(ErrorCode::kUnknownVerdict, "unknown conclusion: \"" + s + "\"");
}

VerificationResult verification_workflow(const std::string& material, retrieval::SearchService& search,
                                         ModelClient& model, const VerificationOptions& options) {
  if (text::trim(material).empty()) throw Error(ErrorCode::kInvalidArgument, "material is empty");
  VerificationResult r;
  std::string stage = "extract";
  try {
    {
      const auto j = ask_json(
          model,
          "Split the material into independent, checkable factual claims. Reply with JSON "
          "{\"points\": [{\"claim\": str, \"source_span\": str}]}.\n\nMaterial:\n" + material,
          "extract");
      const auto pts = j.find("points");
      if (pts == j.end() || !pts->is_array() || pts->empty()) {
        throw StageFailure{"extract", "no verification points"};
      }
      for (const auto& p : *pts) {
        if (!p.is_object() || !p.contains("claim") || !p["claim"].is_string() ||
            text::trim(p["claim"].get<std::string>()).empty()) {
          throw StageFailure{"extract", "point without a claim"};
        }
        r.points.push_back({text::trim(p["claim"].get<std::string>()), p.value("source_span", std::string{}),
                            std::nullopt, {}, {}, {}});
      }
      Json claims = Json::array();
      for (const auto& p : r.points) claims.push_back(p.claim);
      r.trace.push_back({"extract", {{"points", claims}}});
    }

    stage = "plan";
    std::vector<std::size_t> order;
    {
      std::string listing;
      for (std::size_t i = 0; i < r.points.size(); ++i) listing += fmt::format("{}. {}\n", i, r.points[i].claim);
      const auto j = ask_json(
          model,
          "Order the claims so that each is checked after the claims it depends on, and give search "
          "queries for each. Reply with JSON {\"steps\": [{\"point\": index, \"queries\": [str], "
          "\"depends_on\": [index]}]}.\n\n" + listing,
          "plan");
      const auto steps = j.find("steps");
      if (steps == j.end() || !steps->is_array()) throw StageFailure{"plan", "steps missing"};
      std::set<std::size_t> placed;
      for (const auto& s : *steps) {
        if (!s.is_object() || !s.contains("point") || !s["point"].is_number_unsigned()) {
          throw StageFailure{"plan", "step without a point index"};
        }
        const auto idx = s["point"].get<std::size_t>();
        if (idx >= r.points.size() || placed.count(idx)) {
          throw StageFailure{"plan", fmt::format("point {} is out of range or planned twice", idx)};
        }
        auto& p = r.points[idx];
        if (auto q = s.find("queries"); q != s.end() && q->is_array()) {
          for (const auto& x : *q) {
            if (x.is_string() && !text::trim(x.get<std::string>()).empty()) p.queries.push_back(x.get<std::string>());
          }
        }
        if (p.queries.empty()) p.queries.push_back(p.claim);
        if (auto d = s.find("depends_on"); d != s.end() && d->is_array()) {
          for (const auto& x : *d) {
            if (!x.is_number_unsigned() || !placed.count(x.get<std::size_t>())) {
              throw StageFailure{"plan", fmt::format("point {} depends on a claim not planned before it", idx)};
            }
            p.depends_on.push_back(x.get<std::size_t>());
          }
        }
        placed.insert(idx);
        order.push_back(idx);
      }
      if (order.size() != r.points.size()) throw StageFailure{"plan", "plan does not cover every point"};
      r.trace.push_back({"plan", {{"order", order}}});
    }

    stage = "verify";
    {
      Json log = Json::array();
      for (auto idx : order) judge_point(r.points[idx], r.points, search, model, options.k, log);
      r.trace.push_back({"verify", {{"results", log}}});
    }

    stage = "replan";
    for (std::size_t round = 1; round <= options.max_replans; ++round) {
      Json log = Json::array();
      bool any = false;
      for (auto idx : order) {
        auto& p = r.points[idx];
        if (p.conclusion != Conclusion::kDoubtful) continue;
        const auto j = ask_json(
            model,
            fmt::format("The claim \"{}\" stayed doubtful after searching for: {}. Propose new search "
                        "queries, or an empty list to give up. Reply with JSON {{\"queries\": [str]}}.",
                        p.claim, Json(p.queries).dump()),
            "replan");
        std::vector<std::string> fresh;
        if (auto q = j.find("queries"); q != j.end() && q->is_array()) {
          for (const auto& x : *q) {
            if (x.is_string() && !text::trim(x.get<std::string>()).empty() &&
                std::find(p.queries.begin(), p.queries.end(), x.get<std::string>()) == p.queries.end()) {
              fresh.push_back(x.get<std::string>());
            }
          }
        }
        if (fresh.empty()) {
          log.push_back({{"claim", p.claim}, {"action", "gave_up"}});
          continue;
        }
        any = true;
        p.queries.insert(p.queries.end(), fresh.begin(), fresh.end());
        judge_point(p, r.points, search, model, options.k, log);
      }
      r.trace.push_back({"replan", {{"round", round}, {"results", log}}});
      if (!any) break;
    }
    if (options.max_replans == 0) r.trace.push_back({"replan", {{"round", 0}, {"results", Json::array()}}});

    stage = "report";
    for (const auto& p : r.points) {
      std::string cites;
      for (const auto& e : p.evidence) {
        if (e.rfind("search:", 0) != 0) cites += (cites.empty() ? "" : ",") + e;
      }
      r.report += fmt::format("- {} [{}]{}\n", p.claim, to_string(*p.conclusion),
                              cites.empty() ? "" : " \\cite{" + cites + "}");
    }
    r.trace.push_back({"report", {{"lines", r.points.size()}}});
    r.completed = true;
  } catch (const StageFailure& f) {
    r.failed_stage = f.stage;
    r.error = f.message;
    r.trace.push_back({f.stage, {{"error", f.message}}});
  } catch (const Error& e) {
    r.failed_stage = stage;
    r.error = e.what();
    r.trace.push_back({r.failed_stage, {{"error", r.error}}});
  }
  return r;
}

bool posterior_filter(const VerificationPoint& point, ModelClient& judge) {
  if (!point.conclusion) return false;
  const auto prompt = fmt::format(
      "Claim: {}\nConclusion: {}\nEvidence: {}\nIs the conclusion logically consistent with the "
      "evidence? Reply with JSON {{\"consistent\": true|false}}.",
      point.claim, to_string(*point.conclusion), Json(point.evidence).dump());
  std::string reply;
  try {
    reply = judge.complete({{{"user", prompt}}, 256, 0.0}).text;
  } catch (const Error&) {
    return false;
  }
  if (auto j = extract_json(reply); j && j->is_object()) {
    const auto it = j->find("consistent");
    return it != j->end() && it->is_boolean() && it->get<bool>();
  }
  const auto words = text::tokenize(reply);
  return words.size() == 1 && words[0] == "yes";
}

Json to_json(const VerificationPoint& p) {
  return {{"claim", p.claim},
          {"source_span", p.source_span},
          {"conclusion", p.conclusion ? Json(to_string(*p.conclusion)) : Json(nullptr)},
          {"evidence", p.evidence},
          {"queries", p.queries},
          {"depends_on", p.depends_on}};
}

Json to_json(const VerificationResult& r) {
  Json points = Json::array();
  for (const auto& p : r.points) points.push_back(to_json(p));
  Json trace = Json::array();
  for (const auto& t : r.trace) trace.push_back({{"stage", t.stage}, {"detail", t.detail}});
  Json j{{"points", points}, {"trace", trace}, {"report", r.report}, {"completed", r.completed}};
  if (!r.completed) {
    j["failed_stage"] = r.failed_stage;
    j["error"] = r.error;
  }
  return j;
}

}  // namespace dr::synth
