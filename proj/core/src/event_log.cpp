#include "amava/event_log.hpp"

#include <algorithm>

#include "amava/errors.hpp"

namespace amava {

nlohmann::json to_json(const EmissionEvent& e) {
  nlohmann::json j;
  j["batch_index"] = e.batch_index;
  j["category"] = std::string(to_string(e.category));
  j["decision"] = std::string(to_string(e.decision));
  j["clip_key"] = e.clip_key ? nlohmann::json(*e.clip_key) : nlohmann::json(nullptr);
  j["t_batch"] = e.t_batch;
  j["t_decision"] = e.t_decision;
  j["t_sent"] = e.t_sent ? nlohmann::json(*e.t_sent) : nlohmann::json(nullptr);
  return j;
}

EmissionEvent emission_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw std::invalid_argument("record is not an object");
  auto need = [&](const char* k) -> const nlohmann::json& {
    if (!j.contains(k)) throw std::invalid_argument(std::string("missing field ") + k);
    return j.at(k);
  };
  auto integer = [&](const char* k) {
    const auto& v = need(k);
    if (!v.is_number_integer()) throw std::invalid_argument(std::string("field ") + k + " must be an integer");
    return v.get<std::int64_t>();
  };
  EmissionEvent e;
  const auto bi = integer("batch_index");
  if (bi < 0) throw std::invalid_argument("batch_index must be non-negative");
  e.batch_index = static_cast<std::uint64_t>(bi);
  const auto& cat = need("category");
  const auto& dec = need("decision");
  if (!cat.is_string() || !dec.is_string()) throw std::invalid_argument("category and decision must be strings");
  const auto c = parse_category(cat.get<std::string>());
  const auto d = parse_decision(dec.get<std::string>());
  if (!c) throw std::invalid_argument("unknown category " + cat.get<std::string>());
  if (!d) throw std::invalid_argument("unknown decision " + dec.get<std::string>());
  e.category = *c;
  e.decision = *d;
  const auto& key = need("clip_key");
  if (key.is_string()) {
    e.clip_key = key.get<std::string>();
  } else if (!key.is_null()) {
    throw std::invalid_argument("clip_key must be a string or null");
  }
  e.t_batch = integer("t_batch");
  e.t_decision = integer("t_decision");
  const auto& sent = need("t_sent");
  if (sent.is_number_integer()) {
    e.t_sent = sent.get<Millis>();
  } else if (!sent.is_null()) {
    throw std::invalid_argument("t_sent must be an integer or null");
  }
  if (e.t_decision < e.t_batch || (e.t_sent && *e.t_sent < e.t_decision)) {
    throw std::invalid_argument("timestamps must be non-decreasing");
  }
  return e;
}

void EventLog::drop(std::uint64_t batch_index, Millis t, const std::string& reason) {
  append({{"type", "drop"}, {"batch_index", batch_index}, {"t", t}, {"reason", reason}});
}

void EventLog::cache_fill(std::uint64_t batch_index, const std::string& clip_key, Millis t, bool ok) {
  append({{"type", "cache_fill"}, {"batch_index", batch_index}, {"clip_key", clip_key}, {"t", t}, {"ok", ok}});
}

FileEventLog::FileEventLog(const std::string& path) : out_(path, std::ios::app) {
  if (!out_) throw StorageError("cannot open event log " + path);
}

void FileEventLog::append(const nlohmann::json& record) {
  std::lock_guard lock(mu_);
  out_ << record.dump() << '\n';
  out_.flush();
}

void FileEventLog::flush() {
  std::lock_guard lock(mu_);
  out_.flush();
}

void MemoryEventLog::append(const nlohmann::json& record) {
  std::lock_guard lock(mu_);
  records_.push_back(record);
}

std::vector<std::string> MemoryEventLog::lines() const {
  std::lock_guard lock(mu_);
  std::vector<std::string> out;
  for (const auto& r : records_) out.push_back(r.dump());
  return out;
}

std::string MemoryEventLog::text() const {
  std::string out;
  for (const auto& l : lines()) out += l + "\n";
  return out;
}

std::vector<EmissionEvent> MemoryEventLog::emissions() const {
  std::lock_guard lock(mu_);
  std::vector<EmissionEvent> out;
  for (const auto& r : records_) {
    if (!r.contains("type")) out.push_back(emission_from_json(r));
  }
  return out;
}

std::size_t MemoryEventLog::count_type(const std::string& type) const {
  std::lock_guard lock(mu_);
  return static_cast<std::size_t>(std::count_if(records_.begin(), records_.end(), [&](const auto& r) {
    return r.contains("type") && r["type"] == type;
  }));
}

}  // namespace amava
