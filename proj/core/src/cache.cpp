#include "amava/cache.hpp"

#include <algorithm>
#include <chrono>
#include <fstream>
#include <iterator>
#include <random>

#include <nlohmann/json.hpp>
#include <openssl/evp.h>
#include <spdlog/spdlog.h>
#include <unicode/locid.h>
#include <unicode/uchar.h>
#include <unicode/unistr.h>

#include "amava/errors.hpp"

namespace amava {

namespace fs = std::filesystem;

namespace {

constexpr std::string_view kAsciiPunct = "!\"#$%&'()*+,-./:;<=>?@[\\]^_`{|}~";

bool is_punct(UChar32 c) {
  if (c < 0x80 && kAsciiPunct.find(static_cast<char>(c)) != std::string_view::npos) return true;
  return u_ispunct(c) != 0;
}

std::int64_t epoch_ms() {
  return std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::system_clock::now().time_since_epoch())
      .count();
}

std::string extension_for(const std::string& mime) {
  if (mime == "audio/wav" || mime == "audio/x-wav" || mime == "audio/wave") return "wav";
  if (mime == "audio/mpeg" || mime == "audio/mp3") return "mp3";
  throw std::invalid_argument("cache stores WAV or MP3 clips only, got " + mime);
}

void write_atomically(const fs::path& target, const void* data, std::size_t n) {
  fs::path tmp = target;
  tmp += ".tmp" + std::to_string(std::random_device{}());
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw StorageError("cannot write " + tmp.string());
    out.write(static_cast<const char*>(data), static_cast<std::streamsize>(n));
    if (!out) throw StorageError("short write to " + tmp.string());
  }
  std::error_code ec;
  fs::rename(tmp, target, ec);
  if (ec) {
    fs::remove(tmp, ec);
    throw StorageError("cannot rename into " + target.string());
  }
}

std::vector<std::uint8_t> read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw StorageError("cannot read " + p.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

nlohmann::json to_json(const CacheEntry& e) {
  return {{"key", e.key.hex},       {"text", e.text},       {"category", std::string(to_string(e.category))},
          {"mime", e.mime},         {"created_at", e.created_at_ms}, {"last_hit", e.last_hit_ms},
          {"hit_count", e.hit_count}, {"duration_ms", e.duration_ms}};
}

CacheEntry from_json(const nlohmann::json& j) {
  CacheEntry e;
  e.key.hex = j.at("key").get<std::string>();
  e.text = j.at("text").get<std::string>();
  e.category = parse_category(j.at("category").get<std::string>()).value_or(AudioCategory::none);
  e.mime = j.at("mime").get<std::string>();
  e.created_at_ms = j.at("created_at").get<std::int64_t>();
  e.last_hit_ms = j.value("last_hit", std::int64_t{0});
  e.hit_count = j.value("hit_count", std::uint64_t{0});
  e.duration_ms = j.value("duration_ms", Millis{0});
  if (!is_valid_key(e.key.hex)) throw std::invalid_argument("bad key");
  return e;
}

}  // namespace

std::string normalize_prompt(std::string_view text) {
  icu::UnicodeString u = icu::UnicodeString::fromUTF8(icu::StringPiece(text.data(), static_cast<int32_t>(text.size())));
  u.toLower(icu::Locale::getRoot());
  icu::UnicodeString out;
  bool pending_space = false;
  for (int32_t i = 0; i < u.length(); i = u.moveIndex32(i, 1)) {
    const UChar32 c = u.char32At(i);
    if (is_punct(c)) continue;
    if (u_isUWhiteSpace(c)) {
      pending_space = !out.isEmpty();
      continue;
    }
    if (pending_space) out.append(static_cast<UChar>(' '));
    pending_space = false;
    out.append(c);
  }
  std::string result;
  out.toUTF8String(result);
  return result;
}

std::array<std::uint8_t, 32> sha256(std::string_view bytes) {
  std::array<std::uint8_t, 32> digest{};
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest.data(), &len, EVP_sha256(), nullptr) != 1 || len != 32) {
    throw std::runtime_error("SHA-256 computation failed");
  }
  return digest;
}

std::string to_hex(const std::uint8_t* data, std::size_t n) {
  static constexpr char kDigits[] = "0123456789abcdef";
  std::string out(n * 2, '0');
  for (std::size_t i = 0; i < n; ++i) {
    out[2 * i] = kDigits[data[i] >> 4];
    out[2 * i + 1] = kDigits[data[i] & 0xf];
  }
  return out;
}

bool is_valid_key(std::string_view hex) {
  return hex.size() == 64 &&
         std::all_of(hex.begin(), hex.end(), [](char c) { return (c >= '0' && c <= '9') || (c >= 'a' && c <= 'f'); });
}

CacheKey key_of(std::string_view text) {
  const auto d = sha256(normalize_prompt(text));
  return {to_hex(d.data(), d.size())};
}

AudioCache::AudioCache(fs::path dir, std::size_t max_entries) : dir_(std::move(dir)), max_entries_(max_entries) {
  std::error_code ec;
  fs::create_directories(dir_, ec);
  if (ec || !fs::is_directory(dir_)) throw StorageError("cannot create cache directory " + dir_.string());
  load_existing();
}

fs::path AudioCache::clip_path(const CacheEntry& e) const {
  return dir_ / (e.key.hex + "." + extension_for(e.mime));
}

fs::path AudioCache::meta_path(const CacheKey& k) const { return dir_ / (k.hex + ".meta.json"); }

void AudioCache::write_meta(const CacheEntry& e) const {
  const std::string text = to_json(e).dump(2) + "\n";
  write_atomically(meta_path(e.key), text.data(), text.size());
}

void AudioCache::load_existing() {
  std::vector<Slot> found;
  for (const auto& item : fs::directory_iterator(dir_)) {
    const std::string name = item.path().filename().string();
    if (name.find(".tmp") != std::string::npos) {
      std::error_code ec;
      fs::remove(item.path(), ec);
      continue;
    }
    if (!name.ends_with(".meta.json")) continue;
    try {
      const auto bytes = read_file(item.path());
      Slot s{from_json(nlohmann::json::parse(bytes.begin(), bytes.end())), 0};
      if (!fs::exists(clip_path(s.meta))) throw std::invalid_argument("clip file missing");
      found.push_back(std::move(s));
    } catch (const std::exception& e) {
      spdlog::warn("cache: ignoring {}: {}", name, e.what());
    }
  }
  std::sort(found.begin(), found.end(), [](const Slot& a, const Slot& b) {
    const auto ka = std::max(a.meta.last_hit_ms, a.meta.created_at_ms);
    const auto kb = std::max(b.meta.last_hit_ms, b.meta.created_at_ms);
    return ka != kb ? ka < kb : a.meta.key.hex < b.meta.key.hex;
  });
  for (auto& s : found) {
    s.recency = ++tick_;
    slots_[s.meta.key.hex] = std::move(s);
  }
  std::lock_guard lock(mu_);
  evict_locked();
}

std::optional<AudioClip> AudioCache::get(std::string_view text) {
  const CacheKey key = key_of(text);
  std::lock_guard lock(mu_);
  const auto it = slots_.find(key.hex);
  if (it == slots_.end()) return std::nullopt;
  CacheEntry& meta = it->second.meta;
  AudioClip clip;
  clip.bytes = read_file(clip_path(meta));
  clip.mime = meta.mime;
  clip.category = meta.category;
  clip.duration_ms = meta.duration_ms;
  ++meta.hit_count;
  meta.last_hit_ms = epoch_ms();
  it->second.recency = ++tick_;
  write_meta(meta);
  return clip;
}

bool AudioCache::contains(std::string_view text) const {
  const CacheKey key = key_of(text);
  std::lock_guard lock(mu_);
  return slots_.contains(key.hex);
}

std::optional<CacheEntry> AudioCache::entry(std::string_view text) const {
  const CacheKey key = key_of(text);
  std::lock_guard lock(mu_);
  const auto it = slots_.find(key.hex);
  if (it == slots_.end()) return std::nullopt;
  return it->second.meta;
}

CacheKey AudioCache::put(std::string_view text, const AudioClip& clip) {
  if (clip.bytes.empty()) throw std::invalid_argument("cannot cache an empty clip");
  if (clip.mime.empty()) throw std::invalid_argument("cannot cache a clip without a MIME type");
  CacheEntry meta;
  meta.text = normalize_prompt(text);
  const auto d = sha256(meta.text);
  meta.key.hex = to_hex(d.data(), d.size());
  meta.category = clip.category;
  meta.mime = clip.mime;
  meta.created_at_ms = epoch_ms();
  meta.duration_ms = clip.duration_ms;
  const fs::path path = clip_path(meta);  // validates the MIME

  std::lock_guard lock(mu_);
  const auto it = slots_.find(meta.key.hex);
  if (it != slots_.end()) {
    meta.created_at_ms = it->second.meta.created_at_ms;
    meta.hit_count = it->second.meta.hit_count;
    meta.last_hit_ms = it->second.meta.last_hit_ms;
    if (it->second.meta.mime != meta.mime) {
      std::error_code ec;
      fs::remove(clip_path(it->second.meta), ec);
    }
  }
  write_atomically(path, clip.bytes.data(), clip.bytes.size());
  write_meta(meta);
  slots_[meta.key.hex] = Slot{meta, ++tick_};
  evict_locked();
  return meta.key;
}

std::size_t AudioCache::size() const {
  std::lock_guard lock(mu_);
  return slots_.size();
}

void AudioCache::evict_locked() {
  while (max_entries_ > 0 && slots_.size() > max_entries_) {
    auto victim = std::min_element(slots_.begin(), slots_.end(),
                                   [](const auto& a, const auto& b) { return a.second.recency < b.second.recency; });
    std::error_code ec;
    fs::remove(clip_path(victim->second.meta), ec);
    fs::remove(meta_path(victim->second.meta.key), ec);
    spdlog::debug("cache: evicted {}", victim->first);
    slots_.erase(victim);
  }
}

Outcome<AudioClip> fetch_or_synthesize(AudioCache& cache, const std::shared_ptr<SynthBackend>& backend,
                                       AudioCategory category, const std::string& text, const Clock& clock,
                                       bool* synthesized) {
  if (synthesized) *synthesized = false;
  if (auto hit = cache.get(text)) return *hit;
  if (synthesized) *synthesized = true;
  auto made = synthesize(backend, category, text, clock);
  if (succeeded(made)) cache.put(text, std::get<AudioClip>(made));
  return made;
}

}  // namespace amava
