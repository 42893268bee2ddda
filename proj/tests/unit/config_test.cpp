#include <gtest/gtest.h>

#include "hmo/config.hpp"
#include "hmo/error.hpp"

namespace hmo {
namespace {

TEST(Config, Defaults) {
  const EngineConfig c;
  EXPECT_EQ(c.alpha, 1.0);
  EXPECT_EQ(c.beta, 1.0);
  EXPECT_EQ(c.tau, 0.10);
  EXPECT_EQ(c.sessions_cached, 5);
  EXPECT_EQ(c.pivotal_k, 50);
  EXPECT_EQ(c.buffer_h, 200);
  EXPECT_NO_THROW(c.validate());
}

TEST(Config, ValidateRejectsBadValues) {
  EngineConfig c;
  c.pivotal_k = -1;
  EXPECT_THROW(c.validate(), Error);
  c = {};
  c.embed_dim = 0;
  EXPECT_THROW(c.validate(), Error);
  c = {};
  c.persona_ema_rate = 1.5;
  EXPECT_THROW(c.validate(), Error);
  c = {};
  c.lambda = -1e-5;
  EXPECT_THROW(c.validate(), Error);
}

TEST(Config, CanonicalJsonRoundTrips) {
  EngineConfig c;
  c.lambda = 3e-6;
  c.buffer_h = 17;
  const auto text = to_canonical_json(c);
  EXPECT_EQ(config_from_json(text), c);
  EXPECT_EQ(to_canonical_json(config_from_json(text)), text);
  EXPECT_LT(text.find("\"alpha\""), text.find("\"beta\""));
}

TEST(Config, MissingKeysKeepDefaults) {
  const auto c = config_from_json(R"({"pivotal_k": 7})");
  EXPECT_EQ(c.pivotal_k, 7);
  EXPECT_EQ(c.buffer_h, 200);
}

TEST(Config, UnknownKeysAndBadTypesAreRejected) {
  EXPECT_THROW(config_from_json(R"({"gamma": 1})"), Error);
  EXPECT_THROW(config_from_json(R"({"pivotal_k": 2.5})"), Error);
  EXPECT_THROW(config_from_json("[1,2]"), Error);
  EXPECT_THROW(config_from_json("{"), Error);
}

TEST(Config, Fnv1aKnownValues) {
  EXPECT_EQ(fnv1a64(""), 0xcbf29ce484222325ull);
  EXPECT_EQ(fnv1a64("a"), 0xaf63dc4c8601ec8cull);
  EXPECT_EQ(fnv1a64("foobar"), 0x85944171f73967e8ull);
}

TEST(Config, HashTracksContent) {
  EngineConfig a;
  EngineConfig b;
  EXPECT_EQ(config_hash(a), config_hash(b));
  b.tau = 0.2;
  EXPECT_NE(config_hash(a), config_hash(b));
  EXPECT_EQ(config_hash(a), fnv1a64(to_canonical_json(a)));
}

}  // namespace
}  // namespace hmo
