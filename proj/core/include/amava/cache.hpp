#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>

#include "amava/synth.hpp"

namespace amava {

// Lowercase, drop Unicode punctuation (P*) and ASCII punctuation symbols,
// collapse whitespace runs to one space, trim.
std::string normalize_prompt(std::string_view text);

std::array<std::uint8_t, 32> sha256(std::string_view bytes);
std::string to_hex(const std::uint8_t* data, std::size_t n);

struct CacheKey {
  std::string hex;  // 64 lowercase hex chars
  bool operator==(const CacheKey&) const = default;
};

bool is_valid_key(std::string_view hex);

// SHA-256 of the normalized text.
CacheKey key_of(std::string_view text);

struct CacheEntry {
  CacheKey key;
  std::string text;  // normalized
  AudioCategory category = AudioCategory::none;
  std::string mime;
  std::int64_t created_at_ms = 0;  // unix epoch
  std::int64_t last_hit_ms = 0;
  std::uint64_t hit_count = 0;
  Millis duration_ms = 0;
};

// Content-addressed clip store. Layout: <dir>/<hex>.wav|mp3 plus
// <dir>/<hex>.meta.json. Files are written to a temporary name and renamed
// into place. max_entries = 0 means unbounded; otherwise the entry with the
// oldest hit (or creation, if never hit) is evicted first.
class AudioCache {
 public:
  explicit AudioCache(std::filesystem::path dir, std::size_t max_entries = 0);

  // Hit: returns the clip and bumps its hit count.
  std::optional<AudioClip> get(std::string_view text);
  // Same lookup without touching hit statistics.
  bool contains(std::string_view text) const;
  std::optional<CacheEntry> entry(std::string_view text) const;

  CacheKey put(std::string_view text, const AudioClip& clip);

  std::size_t size() const;
  const std::filesystem::path& dir() const { return dir_; }

 private:
  struct Slot {
    CacheEntry meta;
    std::uint64_t recency = 0;
  };

  std::filesystem::path clip_path(const CacheEntry& e) const;
  std::filesystem::path meta_path(const CacheKey& k) const;
  void write_meta(const CacheEntry& e) const;
  void load_existing();
  void evict_locked();

  std::filesystem::path dir_;
  std::size_t max_entries_;
  mutable std::mutex mu_;
  std::map<std::string, Slot> slots_;
  std::uint64_t tick_ = 0;
};

// Clip for `text`, synthesizing and storing it on a miss. `synth_calls` (if
// given) is incremented when the backend was asked.
Outcome<AudioClip> fetch_or_synthesize(AudioCache& cache, const std::shared_ptr<SynthBackend>& backend,
                                       AudioCategory category, const std::string& text, const Clock& clock,
                                       bool* synthesized = nullptr);

}  // namespace amava
