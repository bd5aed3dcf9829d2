// Copyright 2026 The facetex Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


#include <gtest/gtest.h>

#include <string>

#include "facetex/error.hpp"
#include "facetex/fitting.hpp"
#include "facetex/image_io.hpp"
#include "facetex/scene.hpp"
#include "facetex/shading.hpp"
#include "test_util.hpp"

namespace facetex {
namespace {

using testing::ReadFile;
using testing::TempDir;
using testing::WriteFile;

std::string Bytes(std::initializer_list<int> b) {
  std::string s;
  for (int x : b) s.push_back(static_cast<char>(x));
  return s;
}

TEST(Pfm, ByteLayoutIsLittleEndianBottomUp) {
  TempDir dir("pfm");
  // 1 x 2 x 1: top row 1.0, bottom row -2.0; the bottom row is stored first.
  save_pfm(Tensor::constant({1, 2, 1}, {1.0, -2.0}), dir / "a.pfm");
  EXPECT_EQ(ReadFile(dir / "a.pfm"),
            "Pf\n1 2\n-1.0\n" + Bytes({0x00, 0x00, 0x00, 0xc0, 0x00, 0x00, 0x80, 0x3f}));
}

TEST(Pfm, ReadsBigEndianAndThreeChannels) {
  TempDir dir("pfm");
  // One RGB pixel (0.5, 1.0, 2.0), big-endian.
  WriteFile(dir / "b.pfm", "PF\n1 1\n1.0\n" + Bytes({0x3f, 0x00, 0x00, 0x00, 0x3f, 0x80, 0x00, 0x00,
                                                     0x40, 0x00, 0x00, 0x00}));
  const Tensor t = load_pfm(dir / "b.pfm");
  EXPECT_EQ(t.shape(), (Shape{3, 1, 1}));
  EXPECT_EQ(t.to_vector(), (std::vector<double>{0.5, 1.0, 2.0}));
}

TEST(Pfm, RoundTripIsExactForFloat32Values) {
  TempDir dir("pfm");
  const Tensor t = quantize_float32(testing::RandomTensor({3, 7, 5}, 11, -3.0, 3.0));
  save_pfm(t, dir / "t.pfm");
  EXPECT_EQ(load_pfm(dir / "t.pfm").to_vector(), t.to_vector());
  const Tensor m = quantize_float32(testing::RandomTensor({1, 4, 9}, 12, 0.0, 1.0));
  save_pfm(m, dir / "m.pfm");
  EXPECT_EQ(load_pfm(dir / "m.pfm").to_vector(), m.to_vector());
}

TEST(Pfm, Errors) {
  TempDir dir("pfm");
  WriteFile(dir / "magic.pfm", "P6\n1 1\n-1.0\n" + std::string(12, '\0'));
  try {
    load_pfm(dir / "magic.pfm");
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.offset(), 0u);
  }
  WriteFile(dir / "short.pfm", "PF\n2 2\n-1.0\n" + std::string(20, '\0'));
  EXPECT_THROW(load_pfm(dir / "short.pfm"), ParseError);
  WriteFile(dir / "header.pfm", "PF\n2");
  EXPECT_THROW(load_pfm(dir / "header.pfm"), ParseError);
  WriteFile(dir / "zero.pfm", "Pf\n0 2\n-1.0\n");
  EXPECT_THROW(load_pfm(dir / "zero.pfm"), ParseError);
  EXPECT_THROW(load_pfm(dir / "absent.pfm"), IoError);
  EXPECT_THROW(save_pfm(Tensor::zeros({2, 2, 2}), dir / "x.pfm"), ShapeError);
  EXPECT_THROW(save_pfm(Tensor::zeros({1, 1}), dir / "x.pfm"), ShapeError);
  EXPECT_THROW(save_pfm(Tensor::zeros({1, 1, 1}), dir / "no" / "such" / "x.pfm"), IoError);
}

TEST(Png, RoundTripOfEightBitValues) {
  TempDir dir("png");
  const Tensor t = quantize_8bit(testing::RandomTensor({3, 6, 11}, 13, 0.0, 1.0));
  save_png(t, dir / "t.png");
  EXPECT_EQ(load_png(dir / "t.png").to_vector(), t.to_vector());
}

TEST(Png, ClampsRoundsAndReplicatesGray) {
  TempDir dir("png");
  save_png(Tensor::constant({1, 1, 4}, {-0.5, 0.5, 1.5, 100.0 / 255.0 + 0.4 / 255.0}), dir / "g.png");
  const Tensor g = load_png(dir / "g.png");
  ASSERT_EQ(g.shape(), (Shape{3, 1, 4}));
  const std::vector<double> row = {0.0, 128.0 / 255.0, 1.0, 100.0 / 255.0};
  for (std::size_t c = 0; c < 3; ++c) {
    for (std::size_t x = 0; x < 4; ++x) EXPECT_EQ(g.values()[4 * c + x], row[x]);
  }
}

TEST(Png, Errors) {
  TempDir dir("png");
  WriteFile(dir / "text.png", "definitely not a png file");
  try {
    load_png(dir / "text.png");
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.offset(), 0u);
  }
  save_png(Tensor::zeros({3, 16, 16}), dir / "ok.png");
  const std::string full = ReadFile(dir / "ok.png");
  WriteFile(dir / "cut.png", full.substr(0, full.size() / 2));
  EXPECT_THROW(load_png(dir / "cut.png"), ParseError);
  EXPECT_THROW(load_png(dir / "absent.png"), IoError);
  EXPECT_THROW(save_png(Tensor::zeros({4, 2, 2}), dir / "x.png"), ShapeError);
}

TEST(Mask, LoadsFirstChannelClamped) {
  TempDir dir("mask");
  save_pfm(Tensor::constant({3, 1, 3}, {-1.0, 0.25, 2.0, 9, 9, 9, 9, 9, 9}), dir / "m.pfm");
  EXPECT_EQ(load_mask(dir / "m.pfm").to_vector(), (std::vector<double>{0.0, 0.25, 1.0}));
  save_png(Tensor::constant({1, 1, 2}, {0.0, 1.0}), dir / "m.png");
  const Tensor m = load_mask(dir / "m.png");
  EXPECT_EQ(m.shape(), (Shape{1, 1, 2}));
  EXPECT_EQ(m.to_vector(), (std::vector<double>{0.0, 1.0}));
}

TEST(Manifest, Sha256OfKnownInput) {
  TempDir dir("sha");
  WriteFile(dir / "abc", "abc");
  EXPECT_EQ(sha256_file(dir / "abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
  WriteFile(dir / "empty", "");
  EXPECT_EQ(sha256_file(dir / "empty"), "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
  write_manifest(dir.path());
  EXPECT_EQ(ReadFile(dir / "manifest.txt"),
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad  abc\n"
            "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855  empty\n");
}

SceneOptions Small() {
  SceneOptions o;
  o.vertex_target = 1200;
  o.uv_size = 64;
  return o;
}

TEST(Bundle, DeterministicAndSelfConsistent) {
  TempDir a("bundle"), b("bundle");
  const SyntheticScene s = build_scene(Small());
  write_bundle(s, a.path());
  write_bundle(build_scene(Small()), b.path());
  EXPECT_EQ(ReadFile(a / "manifest.txt"), ReadFile(b / "manifest.txt"));
  for (const char* name : {"model.fmm", "params.txt", "albedo_gt.pfm", "light_gt.shm1", "mask_uv.pfm",
                           "input.png", "landmarks.txt", "scene.txt"}) {
    EXPECT_TRUE(std::filesystem::exists(a / name)) << name;
  }
  SceneOptions other = Small();
  other.seed = 2;
  TempDir c("bundle");
  write_bundle(build_scene(other), c.path());
  EXPECT_NE(ReadFile(a / "manifest.txt"), ReadFile(c / "manifest.txt"));

  // The bundle files alone reproduce input.png bit for bit.
  const MorphableModel model = load_model(a / "model.fmm");
  const FaceParams p = load_params(a / "params.txt");
  const Tensor albedo = load_pfm(a / "albedo_gt.pfm");
  EXPECT_EQ(albedo.to_vector(), s.albedo_map.to_vector());
  const Tensor image = render(model, p, s.cam, albedo, Tensor::constant({27}, p.theta_light)).image;
  EXPECT_EQ(quantize_8bit(image).to_vector(), load_png(a / "input.png").to_vector());
  EXPECT_EQ(load_light_map(a / "light_gt.shm1").to_vector(),
            expand_coarse_light(s.light, 64, 64).to_vector());
  EXPECT_EQ(load_pfm(a / "mask_uv.pfm").to_vector(), s.uv_mask.to_vector());
  EXPECT_EQ(load_landmarks(a / "landmarks.txt").size(), s.landmarks.size());
}

TEST(Bundle, LightPresetNames) {
  EXPECT_EQ(parse_light_preset("one-sided"), LightPreset::kOneSided);
  EXPECT_EQ(light_preset_name(parse_light_preset("standard")), "standard");
  EXPECT_THROW(parse_light_preset("sunny"), ValidationError);
  // One-sided means a strong lateral (Y11) term.
  EXPECT_GT(preset_light(LightPreset::kOneSided)[3], 2.0 * preset_light(LightPreset::kStandard)[3]);
}

}  // namespace
}  // namespace facetex
