#include "amava/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <charconv>
#include <fstream>
#include <sstream>

#include "amava/errors.hpp"

namespace amava {

namespace {

constexpr std::array kGapCategories{AudioCategory::description, AudioCategory::hazard, AudioCategory::sfx};
constexpr std::array kDecisions{EmissionDecision::play_cached, EmissionDecision::synthesize_and_play,
                                EmissionDecision::synthesize_and_cache_only, EmissionDecision::skip_throttled,
                                EmissionDecision::skip_none};

std::string number(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

}  // namespace

SessionReport analyze(const std::vector<EmissionEvent>& events, std::uint64_t drops) {
  SessionReport r;
  r.drops = drops;
  for (auto d : kDecisions) r.decisions[d] = 0;
  for (auto c : kGapCategories) r.gaps[c] = {};

  std::vector<const EmissionEvent*> played;
  for (const auto& e : events) {
    ++r.decisions[e.decision];
    if (is_played(e.decision) && e.t_sent) played.push_back(&e);
  }
  std::stable_sort(played.begin(), played.end(), [](const auto* a, const auto* b) {
    return *a->t_sent != *b->t_sent ? *a->t_sent < *b->t_sent : a->batch_index < b->batch_index;
  });
  r.played = played.size();
  if (played.empty()) return r;

  std::vector<double> latency;
  std::uint64_t reordered = 0;
  std::uint64_t max_seen = 0;
  std::map<AudioCategory, Millis> last;
  std::map<AudioCategory, double> gap_sum;
  for (std::size_t i = 0; i < played.size(); ++i) {
    const auto& e = *played[i];
    latency.push_back(static_cast<double>(*e.t_sent - e.t_batch));
    if (i > 0 && e.batch_index < max_seen) ++reordered;
    max_seen = i == 0 ? e.batch_index : std::max(max_seen, e.batch_index);
    if (const auto it = last.find(e.category); it != last.end()) {
      gap_sum[e.category] += static_cast<double>(*e.t_sent - it->second) / 1000.0;
      ++r.gaps[e.category].samples;
    }
    last[e.category] = *e.t_sent;
  }
  for (auto& [c, g] : r.gaps) {
    if (g.samples) g.mean_s = gap_sum[c] / static_cast<double>(g.samples);
  }
  r.reordering_rate = static_cast<double>(reordered) / static_cast<double>(played.size());

  double sum = 0.0;
  for (double l : latency) sum += l;
  r.latency_mean_ms = sum / static_cast<double>(latency.size());
  std::sort(latency.begin(), latency.end());
  const std::size_t n = latency.size();
  r.latency_median_ms = n % 2 ? latency[n / 2] : (latency[n / 2 - 1] + latency[n / 2]) / 2.0;
  const auto rank = static_cast<std::size_t>(std::ceil(0.95 * static_cast<double>(n)));
  r.latency_p95_ms = latency[std::max<std::size_t>(rank, 1) - 1];
  return r;
}

SessionReport analyze(std::istream& in) {
  std::vector<EmissionEvent> events;
  std::uint64_t drops = 0;
  std::string line;
  for (std::size_t no = 1; std::getline(in, line); ++no) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      const auto j = nlohmann::json::parse(line);
      if (j.is_object() && j.contains("type")) {
        if (j["type"] == "drop") ++drops;
        continue;
      }
      events.push_back(emission_from_json(j));
    } catch (const std::exception& e) {
      throw MalformedRecord(no, e.what());
    }
  }
  return analyze(events, drops);
}

SessionReport analyze_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw StorageError("cannot open log " + path);
  return analyze(in);
}

std::string to_csv(const SessionReport& r) {
  std::ostringstream out;
  out << "metric,value\n";
  out << "latency_mean_ms," << number(r.latency_mean_ms) << "\n";
  out << "latency_median_ms," << number(r.latency_median_ms) << "\n";
  out << "latency_p95_ms," << number(r.latency_p95_ms) << "\n";
  out << "reordering_rate," << number(r.reordering_rate) << "\n";
  out << "played," << r.played << "\n";
  for (auto c : kGapCategories) {
    const auto it = r.gaps.find(c);
    const CategoryGap g = it == r.gaps.end() ? CategoryGap{} : it->second;
    out << "gap_" << to_string(c) << "_s," << number(g.mean_s) << "\n";
    out << "gap_" << to_string(c) << "_pairs," << g.samples << "\n";
  }
  for (auto d : kDecisions) {
    const auto it = r.decisions.find(d);
    out << "count_" << to_string(d) << "," << (it == r.decisions.end() ? 0 : it->second) << "\n";
  }
  out << "count_drop," << r.drops << "\n";
  return out.str();
}

void export_csv(const SessionReport& r, const std::string& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw StorageError("cannot write report " + path);
  out << to_csv(r);
  out.flush();
  if (!out) throw StorageError("short write to " + path);
}

SessionReport parse_csv(std::istream& in) {
  std::map<std::string, std::string> kv;
  std::string line;
  std::getline(in, line);
  if (line != "metric,value") throw std::invalid_argument("report CSV has an unexpected header");
  while (std::getline(in, line)) {
    const auto comma = line.find(',');
    if (comma == std::string::npos) throw std::invalid_argument("report CSV row without a comma: " + line);
    kv[line.substr(0, comma)] = line.substr(comma + 1);
  }
  auto real = [&](const std::string& k) {
    const auto it = kv.find(k);
    if (it == kv.end()) throw std::invalid_argument("report CSV lacks " + k);
    double v = 0.0;
    const auto res = std::from_chars(it->second.data(), it->second.data() + it->second.size(), v);
    if (res.ec != std::errc{}) throw std::invalid_argument("report CSV value for " + k + " is not a number");
    return v;
  };
  auto count = [&](const std::string& k) {
    const auto it = kv.find(k);
    if (it == kv.end()) throw std::invalid_argument("report CSV lacks " + k);
    std::uint64_t v = 0;
    const auto res = std::from_chars(it->second.data(), it->second.data() + it->second.size(), v);
    if (res.ec != std::errc{}) throw std::invalid_argument("report CSV value for " + k + " is not a count");
    return v;
  };
  SessionReport r;
  r.latency_mean_ms = real("latency_mean_ms");
  r.latency_median_ms = real("latency_median_ms");
  r.latency_p95_ms = real("latency_p95_ms");
  r.reordering_rate = real("reordering_rate");
  r.played = count("played");
  for (auto c : kGapCategories) {
    const std::string base = "gap_" + std::string(to_string(c));
    r.gaps[c] = {real(base + "_s"), count(base + "_pairs")};
  }
  for (auto d : kDecisions) r.decisions[d] = count("count_" + std::string(to_string(d)));
  r.drops = count("count_drop");
  return r;
}

SessionReport load_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw StorageError("cannot open report " + path);
  return parse_csv(in);
}

}  // namespace amava
