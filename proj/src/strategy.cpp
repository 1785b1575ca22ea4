// JSON strategy files.
//
// The schema is strict: unknown keys anywhere in the document are an error,
// so a typo like "treshold" fails loudly instead of being ignored. Parsing
// materializes per-transform defaults, which makes serialize_strategy a
// canonicalizer: fixed key order, defaults spelled out, no whitespace.

#include "strategy.hpp"

#include <algorithm>
#include <cstdint>
#include <map>
#include <utility>

#include <nlohmann/json.hpp>

#include "errors.hpp"

namespace maskforge {

namespace {

using json = nlohmann::json;
using ordered_json = nlohmann::ordered_json;

std::int64_t get_int(const json& j, const std::string& ctx) {
  if (!j.is_number_integer())
    throw ValidationError(ctx + " must be an integer");
  return j.get<std::int64_t>();
}

std::uint64_t get_nonneg(const json& j, const std::string& ctx) {
  std::int64_t v = get_int(j, ctx);
  if (v < 0) throw ValidationError(ctx + " must be >= 0");
  return static_cast<std::uint64_t>(v);
}

label_t get_label(const json& j, const std::string& ctx) {
  std::int64_t v = get_int(j, ctx);
  if (v < 0 || v > 255)
    throw ValidationError(ctx + " must be a label id in [0, 255]");
  return static_cast<label_t>(v);
}

Connectivity get_conn(const json& j, const std::string& ctx) {
  std::int64_t v = get_int(j, ctx);
  if (v == 6) return Connectivity::Face6;
  if (v == 26) return Connectivity::Full26;
  throw ValidationError(ctx + " must be 6 or 26");
}

ApplyMode get_mode(const json& j, const std::string& ctx) {
  if (!j.is_string()) throw ValidationError(ctx + " must be a string");
  const std::string s = j.get<std::string>();
  if (s == "sequential") return ApplyMode::Sequential;
  if (s == "joint") return ApplyMode::Joint;
  throw ValidationError(ctx + " must be \"sequential\" or \"joint\"");
}

// Parameter key universe, also the emit order for custom transforms.
const std::vector<std::string> kAllParamKeys = {
    "labels", "threshold", "replacement", "k",
    "fill_label", "connectivity", "iterations", "mode"};

struct ParamProfile {
  std::vector<std::string> allowed;  // also canonical emit order
  Connectivity default_conn = Connectivity::Full26;
  bool default_replacement = false;  // materialize replacement=0 when absent
  bool default_mode = false;         // materialize mode=sequential when absent
};

// Canonical parameter sets for the built-ins. Unlisted transforms (custom
// registrations) accept any key and get no defaults filled in.
const ParamProfile* builtin_profile(const std::string& transform) {
  static const std::map<std::string, ParamProfile> profiles = {
      {"remove_small_objects",
       {{"labels", "threshold", "replacement", "connectivity", "mode"},
        Connectivity::Full26, true, true}},
      {"replace_small_objects",
       {{"labels", "threshold", "replacement", "connectivity", "mode"},
        Connectivity::Full26, true, true}},
      {"keep_top_k",
       {{"labels", "k", "connectivity", "mode"}, Connectivity::Full26, false, true}},
      {"fill_holes_with_label",
       {{"labels", "fill_label", "connectivity"}, Connectivity::Face6, false, false}},
      {"morphological_closing",
       {{"labels", "iterations", "connectivity", "mode"},
        Connectivity::Full26, false, true}},
  };
  auto it = profiles.find(transform);
  return it == profiles.end() ? nullptr : &it->second;
}

TransformParams parse_params(const json& jp, const std::string& transform) {
  if (!jp.is_object())
    throw ValidationError("step '" + transform + "': \"params\" must be an object");

  const ParamProfile* profile = builtin_profile(transform);
  const std::vector<std::string>& allowed =
      profile ? profile->allowed : kAllParamKeys;

  for (auto it = jp.begin(); it != jp.end(); ++it) {
    if (std::find(allowed.begin(), allowed.end(), it.key()) == allowed.end() &&
        !(transform == "morphological_closing" && it.key() == "mode"))
      throw ValidationError("step '" + transform + "': unknown parameter key \"" +
                            it.key() + "\"");
  }

  TransformParams p;
  const std::string ctx = "step '" + transform + "'";
  if (jp.contains("labels")) {
    const json& jl = jp.at("labels");
    if (!jl.is_array() || jl.empty())
      throw ValidationError(ctx + ": \"labels\" must be a non-empty array");
    for (const json& e : jl) p.labels.push_back(get_label(e, ctx + ": labels entry"));
  } else {
    throw ValidationError(ctx + ": missing \"labels\"");
  }
  if (jp.contains("threshold"))
    p.threshold = get_nonneg(jp.at("threshold"), ctx + ": \"threshold\"");
  if (jp.contains("replacement"))
    p.replacement = get_label(jp.at("replacement"), ctx + ": \"replacement\"");
  if (jp.contains("k")) p.k = get_nonneg(jp.at("k"), ctx + ": \"k\"");
  if (jp.contains("fill_label"))
    p.fill_label = get_label(jp.at("fill_label"), ctx + ": \"fill_label\"");
  if (jp.contains("connectivity"))
    p.conn = get_conn(jp.at("connectivity"), ctx + ": \"connectivity\"");
  if (jp.contains("iterations"))
    p.iterations = get_nonneg(jp.at("iterations"), ctx + ": \"iterations\"");
  if (jp.contains("mode")) p.mode = get_mode(jp.at("mode"), ctx + ": \"mode\"");

  if (profile) {
    if (!p.conn) p.conn = profile->default_conn;
    if (profile->default_replacement && !p.replacement) p.replacement = 0;
    if (profile->default_mode && !p.mode) p.mode = ApplyMode::Sequential;
  }
  return p;
}

ordered_json emit_params(const StrategyStep& step) {
  const ParamProfile* profile = builtin_profile(step.transform);
  const std::vector<std::string>& order =
      profile ? profile->allowed : kAllParamKeys;
  const TransformParams& p = step.params;

  ordered_json jp = ordered_json::object();
  for (const std::string& key : order) {
    if (key == "labels") {
      jp["labels"] = p.labels;
    } else if (key == "threshold" && p.threshold) {
      jp["threshold"] = *p.threshold;
    } else if (key == "replacement" && p.replacement) {
      jp["replacement"] = *p.replacement;
    } else if (key == "k" && p.k) {
      jp["k"] = *p.k;
    } else if (key == "fill_label" && p.fill_label) {
      jp["fill_label"] = *p.fill_label;
    } else if (key == "connectivity" && p.conn) {
      jp["connectivity"] = (*p.conn == Connectivity::Face6) ? 6 : 26;
    } else if (key == "iterations" && p.iterations) {
      jp["iterations"] = *p.iterations;
    } else if (key == "mode" && p.mode) {
      jp["mode"] = (*p.mode == ApplyMode::Sequential) ? "sequential" : "joint";
    }
  }
  return jp;
}

}  // namespace

StrategySpec parse_strategy(const std::string& json_text, const TransformRegistry& reg,
                            const LabelScheme& scheme) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ValidationError(std::string("malformed strategy JSON: ") + e.what());
  }
  if (!doc.is_object())
    throw ValidationError("strategy document must be a JSON object");
  for (auto it = doc.begin(); it != doc.end(); ++it)
    if (it.key() != "name" && it.key() != "steps")
      throw ValidationError("unknown top-level key \"" + it.key() + "\"");
  if (!doc.contains("name") || !doc.at("name").is_string())
    throw ValidationError("strategy requires a string \"name\"");
  if (!doc.contains("steps") || !doc.at("steps").is_array())
    throw ValidationError("strategy requires an array \"steps\"");

  StrategySpec spec;
  spec.name = doc.at("name").get<std::string>();
  for (const json& js : doc.at("steps")) {
    if (!js.is_object())
      throw ValidationError("each step must be a JSON object");
    for (auto it = js.begin(); it != js.end(); ++it)
      if (it.key() != "transform" && it.key() != "params")
        throw ValidationError("unknown step key \"" + it.key() + "\"");
    if (!js.contains("transform") || !js.at("transform").is_string())
      throw ValidationError("each step requires a string \"transform\"");
    StrategyStep step;
    step.transform = js.at("transform").get<std::string>();
    const TransformRegistry::Entry& entry = reg.lookup(step.transform);
    step.params = parse_params(js.contains("params") ? js.at("params")
                                                     : json::object(),
                               step.transform);
    entry.validate(step.params, scheme);
    spec.steps.push_back(std::move(step));
  }
  return spec;
}

std::string serialize_strategy(const StrategySpec& spec) {
  ordered_json doc;
  doc["name"] = spec.name;
  doc["steps"] = ordered_json::array();
  for (const StrategyStep& step : spec.steps) {
    ordered_json js;
    js["transform"] = step.transform;
    js["params"] = emit_params(step);
    doc["steps"].push_back(std::move(js));
  }
  return doc.dump();
}

LabelVolume apply_strategy(const LabelVolume& vol, const StrategySpec& spec,
                           TransformRegistry& reg, const LabelScheme& scheme) {
  reg.freeze();
  LabelVolume out = vol;
  for (const StrategyStep& step : spec.steps) {
    const TransformRegistry::Entry& entry = reg.lookup(step.transform);
    entry.validate(step.params, scheme);
    out = entry.run(out, step.params, scheme);
  }
  return out;
}

std::vector<std::string> preset_names() {
  return {"strategy_1", "strategy_2", "strategy_3"};
}

namespace {

// Embedded canonical documents; serialize_strategy(preset(n)) reproduces
// these byte for byte.
const char* preset_json(const std::string& name) {
  if (name == "strategy_1")
    return R"({"name":"strategy_1","steps":[)"
           R"({"transform":"remove_small_objects","params":{"labels":[4],"threshold":100,"replacement":0,"connectivity":26,"mode":"sequential"}})"
           R"(]})";
  if (name == "strategy_2")
    return R"({"name":"strategy_2","steps":[)"
           R"({"transform":"remove_small_objects","params":{"labels":[4],"threshold":100,"replacement":0,"connectivity":26,"mode":"sequential"}},)"
           R"({"transform":"keep_top_k","params":{"labels":[4],"k":1,"connectivity":26,"mode":"sequential"}},)"
           R"({"transform":"fill_holes_with_label","params":{"labels":[1,2,3],"fill_label":2,"connectivity":6}})"
           R"(]})";
  if (name == "strategy_3")
    return R"({"name":"strategy_3","steps":[)"
           R"({"transform":"replace_small_objects","params":{"labels":[3],"threshold":100,"replacement":2,"connectivity":26,"mode":"sequential"}},)"
           R"({"transform":"replace_small_objects","params":{"labels":[4],"threshold":100,"replacement":2,"connectivity":26,"mode":"sequential"}},)"
           R"({"transform":"remove_small_objects","params":{"labels":[2],"threshold":64,"replacement":0,"connectivity":26,"mode":"sequential"}})"
           R"(]})";
  return nullptr;
}

}  // namespace

StrategySpec preset(const std::string& name) {
  const char* doc = preset_json(name);
  if (!doc)
    throw ValidationError("unknown preset strategy '" + name + "'");
  return parse_strategy(doc);
}

}  // namespace maskforge
