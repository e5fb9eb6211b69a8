// Copyright 2026 The CocoAAN Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include "cocoaan/config.hpp"
#include "cocoaan/errors.hpp"

namespace cocoaan {
namespace {

TEST(TrainConfigDefaults, ReferenceHyperparameters) {
  const TrainConfig cfg;
  EXPECT_EQ(cfg.lr_s, 0.0001);
  EXPECT_EQ(cfg.lr_c, 0.0001);
  EXPECT_EQ(cfg.lr_g, 0.0002);
  EXPECT_EQ(cfg.lr_d, 0.0004);
  EXPECT_EQ(cfg.beta1, 0.0);
  EXPECT_EQ(cfg.beta2, 0.9);
  EXPECT_EQ(cfg.lambda, 10.0);
  EXPECT_EQ(cfg.batch_size, 32);
}

TEST(TrainConfigText, DefaultSerialisationIsVerbatim) {
  const std::string text = serialize_config(TrainConfig{});
  EXPECT_EQ(text.rfind("config_version = 1\n", 0), 0u);
  for (const char* line : {"lr_s = 0.0001\n", "lr_c = 0.0001\n", "lr_g = 0.0002\n",
                           "lr_d = 0.0004\n", "beta1 = 0\n", "beta2 = 0.9\n", "lambda = 10\n"}) {
    EXPECT_NE(text.find(line), std::string::npos) << line;
  }
}

TEST(TrainConfigText, RoundTrip) {
  TrainConfig cfg;
  cfg.scale = {32, 16, 0.25};
  cfg.lr_d = 3.3e-4;
  cfg.seed = 18446744073709551615ULL;
  cfg.non_saturating = true;
  cfg.precision = Precision::f32;
  ConfigMap map = parse_config_text(serialize_config(cfg));
  TrainConfig back;
  apply_config(map, back);
  EXPECT_TRUE(map.empty());
  EXPECT_EQ(back, cfg);
}

TEST(SynthConfigText, RoundTrip) {
  SynthConfig cfg;
  cfg.n_styles = 7;
  cfg.slant_min_deg = -3.25;
  ConfigMap map = parse_config_text(serialize_config(cfg));
  SynthConfig back;
  apply_config(map, back);
  EXPECT_TRUE(map.empty());
  EXPECT_EQ(serialize_config(back), serialize_config(cfg));
}

TEST(ConfigParse, CommentsQuotesAndWhitespace) {
  const ConfigMap m = parse_config_text("# header\n  lr_s=0.5 # trailing\n\nprecision = \"f32\"\n");
  EXPECT_EQ(m.at("lr_s"), "0.5");
  EXPECT_EQ(m.at("precision"), "f32");
}

TEST(ConfigParse, Errors) {
  EXPECT_THROW(parse_config_text("novalue\n"), ConfigError);
  EXPECT_THROW(parse_config_text("a = 1\na = 2\n"), ConfigError);
  TrainConfig cfg;
  ConfigMap bad_number = parse_config_text("lr_s = fast\n");
  EXPECT_THROW(apply_config(bad_number, cfg), ConfigError);
  ConfigMap bad_version = parse_config_text("config_version = 2\n");
  EXPECT_THROW(apply_config(bad_version, cfg), ConfigError);
  ConfigMap unknown = parse_config_text("learning_rate = 1\n");
  apply_config(unknown, cfg);
  EXPECT_THROW(reject_unknown_keys(unknown), ConfigError);
}

TEST(TrainConfigValidate, RejectsOutOfRangeValues) {
  TrainConfig cfg;
  cfg.batch_size = 1;
  EXPECT_THROW(cfg.validate(), ConfigError);
  cfg = TrainConfig{};
  cfg.beta2 = 1.0;
  EXPECT_THROW(cfg.validate(), ConfigError);
  cfg = TrainConfig{};
  cfg.lr_g = 0.0;
  EXPECT_THROW(cfg.validate(), ConfigError);
  cfg = TrainConfig{};
  cfg.scale.resolution = 100;
  EXPECT_THROW(cfg.validate(), ConfigError);
}

TEST(FormatDouble, ShortestRoundTrip) {
  EXPECT_EQ(format_double(0.0001), "0.0001");
  EXPECT_EQ(format_double(10.0), "10");
  EXPECT_EQ(format_double(0.1 + 0.2), "0.30000000000000004");
}

}  // namespace
}  // namespace cocoaan
