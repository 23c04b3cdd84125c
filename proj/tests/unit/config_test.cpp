#include <fstream>

#include <gtest/gtest.h>

#include "amava/net/config.hpp"
#include "fixtures.hpp"

using amava::net::ConfigError;
using amava::net::parse_config;

namespace {

std::string key_of(const std::string& text) {
  try {
    parse_config(text, "/base");
  } catch (const ConfigError& e) {
    return e.key();
  }
  return "";
}

const std::string kMinimal = "[interpreter]\nscript = s.json\n";

}  // namespace

TEST(Config, ExampleParsesWithDefaults) {
  const auto c = parse_config(amava::net::example_config(), "/base");
  EXPECT_EQ(c.port, 8765);
  EXPECT_EQ(c.pipeline.batch_size, 2);
  EXPECT_EQ(c.pipeline.capture_hz, 2);
  EXPECT_EQ(c.pipeline.policy.hazard_throttle_ms, 5000);
  EXPECT_EQ(c.pipeline.policy.description_throttle_ms, 15000);
  EXPECT_EQ(c.interpreter.timeout_ms, 2500);
  EXPECT_EQ(c.synth.timeout_ms, 3000);
  EXPECT_EQ(c.model_path, "/base/model.bin");
  EXPECT_EQ(c.interpreter.script, "/base/interpreter_script.json");
  EXPECT_EQ(c.cache_dir, "/base/audio-cache");
}

TEST(Config, DemoFileLoads) {
  const auto c = amava::net::load_config(AMAVA_DEMO_DIR "/amava.ini");
  EXPECT_EQ(c.interpreter.backend, "mock");
  EXPECT_EQ(std::filesystem::path(c.interpreter.script).filename(), "interpreter_script.json");
  EXPECT_TRUE(std::filesystem::path(c.model_path).is_absolute());
}

TEST(Config, MinimalUsesDefaults) {
  const auto c = parse_config(kMinimal, "/base");
  EXPECT_EQ(c.address, "127.0.0.1");
  EXPECT_EQ(c.pipeline.max_in_flight, 2);
  EXPECT_EQ(c.synth.backend, "mock");
}

TEST(Config, AbsolutePathsKept) {
  const auto c = parse_config("[interpreter]\nscript = /x/s.json\n[cache]\ndir = /var/c\n", "/base");
  EXPECT_EQ(c.interpreter.script, "/x/s.json");
  EXPECT_EQ(c.cache_dir, "/var/c");
}

TEST(Config, ErrorsNameTheKey) {
  EXPECT_EQ(key_of(kMinimal + "[pipeline]\nbatch_size = 4\n"), "pipeline.batch_size");
  EXPECT_EQ(key_of(kMinimal + "[pipeline]\ncapture_hz = 0\n"), "pipeline.capture_hz");
  EXPECT_EQ(key_of(kMinimal + "[bogus]\nx = 1\n"), "bogus");
  EXPECT_EQ(key_of(kMinimal + "[server]\nprt = 1\n"), "server.prt");
  EXPECT_EQ(key_of(kMinimal + "[server]\nport = 70000\n"), "server.port");
  EXPECT_EQ(key_of(kMinimal + "[server]\nport = eighty\n"), "server.port");
  EXPECT_EQ(key_of(kMinimal + "[server]\nlog_level = loud\n"), "server.log_level");
  EXPECT_EQ(key_of(kMinimal + "[synth]\nbackend = cloud\n"), "synth.backend");
  EXPECT_EQ(key_of(kMinimal + "[synth]\ntimeout_ms = 0\n"), "synth.timeout_ms");
  EXPECT_EQ(key_of(kMinimal + "[policy]\nsfx_throttle_ms = -1\n"), "policy.sfx_throttle_ms");
  EXPECT_EQ(key_of(kMinimal + "[flow]\npyramid_scale = 2\n"), "flow");
  EXPECT_EQ(key_of("[interpreter]\nbackend = mock\n"), "interpreter.script");
  EXPECT_EQ(key_of("[server\n"), "file");
}

TEST(Config, LiveInterpreterNeedsNoScript) {
  EXPECT_NO_THROW(parse_config("[interpreter]\nbackend = live\n", "/base"));
}

TEST(Config, MissingFile) {
  try {
    amava::net::load_config("/nonexistent/amava.ini");
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_EQ(e.key(), "file");
  }
}

TEST(Config, LoadResolvesAgainstFileDir) {
  amava::testing::TempDir dir;
  std::ofstream(dir.file("a.ini")) << kMinimal;
  const auto c = amava::net::load_config(dir.file("a.ini"));
  EXPECT_EQ(std::filesystem::path(c.interpreter.script), dir.path() / "s.json");
}
