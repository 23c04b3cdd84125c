#include "amava/interpreter.hpp"

#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "amava/errors.hpp"
#include "amava/text.hpp"

namespace amava {

namespace {

const char* const kLowPrompt =
    "You are the eyes of a blind or low-vision pedestrian. Describe the scene in these camera frames "
    "in one plain sentence of 15 to 20 words. Mention the layout and the objects that matter for "
    "getting around. Reply with the sentence only.";

const char* const kHighPrompt =
    "You are the eyes of a blind or low-vision pedestrian. These consecutive camera frames show movement. "
    "Reply with exactly one line of the form `category: content`, where category is one of "
    "hazard, sfx, description, none.\n"
    "hazard: a short spoken alert about something that needs immediate attention.\n"
    "sfx: a short prompt for a sound effect that conveys the motion, for example `passing car`.\n"
    "description: a 15 to 20 word description when the movement is worth explaining in words.\n"
    "none: nothing worth reporting; leave the content empty.";

MockInterpreter::Pattern parse_pattern(const std::string& s) {
  if (s.empty() || s == "any") return MockInterpreter::Pattern::any;
  const auto b = parse_branch(s);
  if (!b) throw std::invalid_argument("mock script: unknown branch pattern '" + s + "'");
  return *b == Branch::low ? MockInterpreter::Pattern::low : MockInterpreter::Pattern::high;
}

}  // namespace

std::string build_prompt(Branch branch) { return branch == Branch::low ? kLowPrompt : kHighPrompt; }

SceneResponse parse_response(const std::string& raw) {
  SceneResponse out;
  out.raw = raw;
  const std::string line = raw.substr(0, raw.find('\n'));
  const auto colon = line.find(':');
  if (colon == std::string::npos) return out;
  const auto category = parse_category(trim(line.substr(0, colon)));
  if (!category || *category == AudioCategory::none) return out;
  std::string content = trim(line.substr(colon + 1));
  if (content.empty()) return out;
  out.category = *category;
  out.content = std::move(content);
  return out;
}

std::string format_response(AudioCategory category, const std::string& content) {
  if (category == AudioCategory::none) return "none:";
  return std::string(to_string(category)) + ": " + content;
}

Outcome<SceneResponse> interpret(const std::shared_ptr<InterpreterBackend>& backend,
                                 std::span<const EncodedFrame> frames, Branch branch, const Clock& clock) {
  auto copy = std::make_shared<std::vector<EncodedFrame>>(frames.begin(), frames.end());
  std::function<std::string()> call = [backend, copy, branch] {
    return backend->describe(*copy, build_prompt(branch), branch);
  };
  auto raw = call_with_budget(std::move(call), backend->timeout_budget_ms(), clock);
  if (!succeeded(raw)) return std::get<BackendFailure>(raw);
  const std::string& text = std::get<std::string>(raw);

  if (branch == Branch::high) return parse_response(text);

  SceneResponse out;
  out.raw = text;
  const auto words = split_words(text);
  if (words.empty()) return out;
  out.category = AudioCategory::description;
  out.content = words.size() <= kMaxDescriptionWords ? trim(text) : join_words(words, kMaxDescriptionWords);
  return out;
}

MockInterpreter::MockInterpreter(std::vector<Entry> script, std::shared_ptr<Clock> clock, Millis latency_ms,
                                 Millis timeout_ms)
    : script_(std::move(script)), clock_(std::move(clock)), latency_ms_(latency_ms), timeout_ms_(timeout_ms) {
  if (!clock_) throw std::invalid_argument("MockInterpreter needs a clock");
  if (latency_ms < 0 || timeout_ms <= 0) throw std::invalid_argument("MockInterpreter: bad latency or timeout");
}

std::shared_ptr<MockInterpreter> MockInterpreter::from_json_text(const std::string& text, std::shared_ptr<Clock> clock) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument(std::string("mock script is not valid JSON: ") + e.what());
  }
  if (!doc.is_object() || !doc.contains("entries") || !doc["entries"].is_array()) {
    throw std::invalid_argument("mock script needs an \"entries\" array");
  }
  std::vector<Entry> entries;
  for (const auto& e : doc["entries"]) {
    if (!e.is_object()) throw std::invalid_argument("mock script entries must be objects");
    Entry entry;
    entry.pattern = parse_pattern(e.value("branch", std::string("any")));
    entry.response = e.value("response", std::string());
    entry.latency_ms = e.value("latency_ms", Millis{-1});
    entry.fail = e.value("fail", false);
    entries.push_back(std::move(entry));
  }
  return std::make_shared<MockInterpreter>(std::move(entries), std::move(clock), doc.value("latency_ms", Millis{0}),
                                           doc.value("timeout_ms", kDefaultInterpreterTimeoutMs));
}

std::shared_ptr<MockInterpreter> MockInterpreter::from_json_file(const std::string& path, std::shared_ptr<Clock> clock) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open mock script " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return from_json_text(ss.str(), std::move(clock));
}

std::string MockInterpreter::describe(std::span<const EncodedFrame>, const std::string&, Branch branch) {
  const std::size_t index = cursor_.fetch_add(1);
  if (script_.empty()) throw BackendError("mock script is empty");
  const Entry& entry = script_[index % script_.size()];
  const Millis latency = entry.latency_ms >= 0 ? entry.latency_ms : latency_ms_.load();
  if (latency > 0) clock_->sleep_for(latency);
  if (entry.fail) throw BackendError("scripted failure at call " + std::to_string(index));
  const bool mismatch = (entry.pattern == Pattern::low && branch != Branch::low) ||
                        (entry.pattern == Pattern::high && branch != Branch::high);
  if (mismatch) {
    throw BackendError("script entry " + std::to_string(index % script_.size()) + " does not expect the " +
                       std::string(to_string(branch)) + " branch");
  }
  return entry.response;
}

}  // namespace amava
