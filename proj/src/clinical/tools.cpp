#include "ckd/clinical/tools.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>

#include "ckd/common/delimited.hpp"
#include "ckd/common/digest.hpp"
#include "ckd/common/error.hpp"
#include "ckd/eval/report.hpp"

namespace ckd {

using nlohmann::json;

std::string_view tool_name(ToolId id) {
  switch (id) {
    case ToolId::SCORED: return "SCORED";
    case ToolId::KSHIRSAGAR: return "KSHIRSAGAR";
    case ToolId::SPS: return "SPS";
    case ToolId::KEARNS: return "KEARNS";
    case ToolId::KWON: return "KWON";
  }
  return "?";
}

ToolId parse_tool(std::string_view name) {
  for (auto t : kAllTools)
    if (tool_name(t) == name) return t;
  throw ValidationError("unknown clinical tool " + std::string(name));
}

std::string transcription_checksum(json j) {
  j.erase("checksum");
  return sha256_hex(j.dump());
}

std::vector<std::string> ClinicalTool::required_features() const {
  std::vector<std::string> out;
  for (const auto& i : inputs) out.push_back(i.name);
  return out;
}

ClinicalTool ClinicalTool::from_json(const json& j) {
  const auto expected = transcription_checksum(j);
  const auto recorded = j.at("checksum").get<std::string>();
  if (expected != recorded) throw ValidationError("scoring table checksum mismatch for " + j.value("tool_id", "?"));
  ClinicalTool t;
  t.id = parse_tool(j.at("tool_id").get<std::string>());
  t.name = j.at("name").get<std::string>();
  t.citation = j.at("citation").get<std::string>();
  t.notes = j.value("notes", "");
  const auto model = j.at("model").get<std::string>();
  if (model != "points" && model != "logistic") throw ValidationError("unknown tool model " + model);
  t.model = model == "points" ? ToolModel::Points : ToolModel::Logistic;
  t.verified = j.at("verified").get<bool>();
  for (const auto& i : j.at("inputs"))
    t.inputs.push_back({i.at("name").get<std::string>(), i.at("categories").get<std::vector<std::string>>()});
  for (const auto& [input, cats] : j.at("weights").items()) {
    const auto it = std::find_if(t.inputs.begin(), t.inputs.end(), [&](const ToolInput& x) { return x.name == input; });
    if (it == t.inputs.end()) throw ValidationError("weight for undeclared input " + input);
    for (const auto& [cat, w] : cats.items()) {
      if (std::find(it->categories.begin(), it->categories.end(), cat) == it->categories.end())
        throw ValidationError("weight for undeclared category " + input + "=" + cat);
      t.weights[input][cat] = w.get<double>();
    }
  }
  t.intercept = j.value("intercept", 0.0);
  const auto& d = j.at("decision");
  const auto type = d.at("type").get<std::string>();
  if (type == "threshold") {
    t.threshold = d.at("threshold").get<double>();
  } else if (type == "bands") {
    for (const auto& b : d.at("bands")) t.bands.push_back({b.at("label").get<std::string>(), b.at("min").get<double>()});
    for (std::size_t i = 1; i < t.bands.size(); ++i)
      if (t.bands[i].min_score <= t.bands[i - 1].min_score) throw ValidationError("risk bands must increase");
    t.negative_bands = d.at("negative").get<std::vector<std::string>>();
  } else {
    throw ValidationError("unknown decision rule " + type);
  }
  t.checksum = recorded;
  return t;
}

ClinicalTool ClinicalTool::load(const std::filesystem::path& path) {
  return from_json(json::parse(read_text_file(path)));
}

std::filesystem::path scoring_dir() {
  if (const char* env = std::getenv("CKD_SCORING_DIR")) return env;
  return std::filesystem::path(CKD_SOURCE_DIR) / "tools" / "scoring";
}

namespace {

std::string file_stem(ToolId id) {
  std::string s(tool_name(id));
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

}  // namespace

const ClinicalTool& clinical_tool(ToolId id) {
  static const std::array<ClinicalTool, 5> tools = [] {
    std::array<ClinicalTool, 5> t;
    for (std::size_t i = 0; i < kAllTools.size(); ++i)
      t[i] = ClinicalTool::load(scoring_dir() / (file_stem(kAllTools[i]) + ".json"));
    return t;
  }();
  return tools[static_cast<std::size_t>(id)];
}

ClinicalScoreResult score_clinical(const ClinicalTool& tool, const FeatureMap& patient) {
  std::vector<std::string> missing;
  for (const auto& in : tool.inputs)
    if (!patient.contains(in.name)) missing.push_back(in.name);
  if (!missing.empty()) {
    std::string list;
    for (const auto& m : missing) list += (list.empty() ? "" : ", ") + m;
    throw FieldError(FieldError::Reason::Missing, missing.front(),
                     std::string(tool_name(tool.id)) + " is missing required features: " + list);
  }
  double s = tool.intercept;
  for (const auto& in : tool.inputs) {
    const auto& v = patient.at(in.name);
    if (std::find(in.categories.begin(), in.categories.end(), v) == in.categories.end())
      throw FieldError(FieldError::Reason::UnknownCategory, in.name, "unknown category " + in.name + "=" + v);
    if (const auto w = tool.weights.find(in.name); w != tool.weights.end())
      if (const auto c = w->second.find(v); c != w->second.end()) s += c->second;
  }
  ClinicalScoreResult r;
  r.tool = tool.id;
  r.raw_score = tool.model == ToolModel::Logistic ? 1.0 / (1.0 + std::exp(-s)) : s;
  if (!tool.bands.empty()) {
    std::string label = tool.bands.front().label;
    for (const auto& b : tool.bands)
      if (r.raw_score >= b.min_score) label = b.label;
    r.category = label;
    r.binary_call =
        std::find(tool.negative_bands.begin(), tool.negative_bands.end(), label) == tool.negative_bands.end() ? 1 : 0;
  } else {
    r.binary_call = r.raw_score >= tool.threshold ? 1 : 0;
  }
  return r;
}

ClinicalScoreResult score_clinical(ToolId id, const FeatureMap& patient) {
  return score_clinical(clinical_tool(id), patient);
}

FeatureMap ToolBinding::bind(const FeatureMap& row) const {
  FeatureMap out;
  for (const auto& [input, b] : inputs) {
    if (b.absent) {
      out[input] = *b.absent;
      continue;
    }
    const auto it = row.find(b.feature);
    if (it == row.end()) continue;  // reported as missing by score_clinical
    const auto m = b.map.find(it->second);
    if (m == b.map.end())
      throw FieldError(FieldError::Reason::UnknownCategory, b.feature,
                       "no binding for " + b.feature + "=" + it->second + " in " + std::string(tool_name(tool)));
    out[input] = m->second;
  }
  return out;
}

std::vector<ToolBinding> load_bindings(const std::filesystem::path& path) {
  const auto j = json::parse(read_text_file(path));
  if (transcription_checksum(j) != j.at("checksum").get<std::string>())
    throw ValidationError("binding file checksum mismatch: " + path.string());
  std::vector<ToolBinding> out;
  for (const auto& [tool, inputs] : j.at("tools").items()) {
    ToolBinding tb;
    tb.tool = parse_tool(tool);
    for (const auto& [input, b] : inputs.items()) {
      InputBinding ib;
      if (b.contains("absent")) {
        ib.absent = b.at("absent").get<std::string>();
      } else {
        ib.feature = b.at("feature").get<std::string>();
        ib.map = b.at("map").get<std::map<std::string, std::string>>();
      }
      ib.note = b.value("note", "");
      tb.inputs.emplace(input, std::move(ib));
    }
    out.push_back(std::move(tb));
  }
  return out;
}

ToolBinding primary_binding(ToolId id) {
  static const auto all = load_bindings(scoring_dir() / "primary_bindings.json");
  for (const auto& b : all)
    if (b.tool == id) return b;
  throw ValidationError("no primary binding for " + std::string(tool_name(id)));
}

ToolEvaluation evaluate_tool(const ClinicalTool& tool, const ToolBinding& binding, const Cohort& cohort) {
  ToolEvaluation ev;
  ev.tool = tool.id;
  std::vector<int> pred;
  std::vector<double> scores;
  for (std::size_t i = 0; i < cohort.size(); ++i) {
    try {
      auto r = score_clinical(tool, binding.bind(cohort.row_map(i)));
      pred.push_back(r.binary_call);
      scores.push_back(r.raw_score);
      ev.results.push_back(std::move(r));
    } catch (const ValidationError& e) {
      throw ValidationError("row " + std::to_string(i) + ": " + e.what());
    }
  }
  const auto fm = fold_metrics(0, cohort.labels(), pred, scores);
  ev.counts = fm.counts;
  ev.values = fm.values;
  ev.zero_division = fm.zero_division;
  return ev;
}

namespace {

std::string stars_for(const MetricSummary& s, Metric m, double baseline) {
  const auto folds = s.fold_values(m);
  if (folds.size() < 2) return "";
  return compare_significance(folds, baseline).stars;
}

}  // namespace

std::string format_sota_table(std::span<const ToolEvaluation> tools, std::span<const ProposedModel> models) {
  DelimitedTable t;
  t.header = {"Tool"};
  for (auto m : kAllMetrics) t.header.emplace_back(metric_label(m));
  for (const auto& ev : tools) {
    std::vector<std::string> cells{std::string(tool_name(ev.tool))};
    for (auto m : kAllMetrics) {
      std::string cell = format_point(m, ev.get(m));
      std::string marks;
      for (const auto& pm : models) {
        const auto st = stars_for(pm.summary, m, ev.get(m));
        marks += (marks.empty() ? "" : ", ") + (st.empty() ? std::string("ns") : st) + " " + pm.name;
      }
      if (!marks.empty()) cell += " (" + marks + ")";
      cells.push_back(std::move(cell));
    }
    t.rows.push_back(std::move(cells));
  }
  for (const auto& pm : models) {
    std::vector<std::string> cells{pm.name};
    for (auto m : kAllMetrics) cells.push_back(format_stat(m, pm.summary.get(m)));
    t.rows.push_back(std::move(cells));
  }
  return format_delimited(t);
}

json sota_to_json(std::span<const ToolEvaluation> tools, std::span<const ProposedModel> models) {
  json rows = json::array();
  for (const auto& ev : tools) {
    json metrics = json::object();
    for (auto m : kAllMetrics) {
      json cmp = json::object();
      for (const auto& pm : models) {
        const auto folds = pm.summary.fold_values(m);
        if (folds.size() < 2) continue;
        const auto sig = compare_significance(folds, ev.get(m));
        cmp[pm.name] = {{"t", sig.t_statistic}, {"p", sig.p_value}, {"stars", sig.stars}};
      }
      metrics[std::string(metric_name(m))] = {{"value", ev.get(m)}, {"comparisons", cmp}};
    }
    const auto& c = ev.counts;
    rows.push_back({{"tool", std::string(tool_name(ev.tool))},
                    {"metrics", metrics},
                    {"confusion", {{"tp", c.tp}, {"fp", c.fp}, {"tn", c.tn}, {"fn", c.fn}}}});
  }
  json proposed = json::array();
  for (const auto& pm : models) proposed.push_back({{"name", pm.name}, {"summary", summary_to_json(pm.summary)}});
  return {{"tools", rows}, {"proposed", proposed}};
}

}  // namespace ckd
