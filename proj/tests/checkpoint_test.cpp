#include "lae/checkpoint.hpp"
#include "lae/error.hpp"

#include <gtest/gtest.h>

#include <filesystem>
#include <sstream>

namespace {

lae::Checkpoint sample_checkpoint(bool with_anchor) {
  auto net = lae::init_network(std::vector<std::size_t>{16, 64, 32, 101}, 5);
  net.mutable_layer(1).bias[3] = -0.1 / 3.0;
  net.set_freeze_extractor(with_anchor);
  return {net, with_anchor ? std::optional<double>(2.2345678901234567) : std::nullopt};
}

TEST(Checkpoint, StreamRoundTripIsBitwise) {
  for (bool anchor : {false, true}) {
    const auto ck = sample_checkpoint(anchor);
    std::stringstream ss;
    lae::write_checkpoint(ss, ck);
    const auto back = lae::read_checkpoint(ss);
    EXPECT_TRUE(back.network == ck.network);
    EXPECT_EQ(back.network.freeze_extractor(), ck.network.freeze_extractor());
    EXPECT_EQ(back.anchor_mae, ck.anchor_mae);
  }
}

TEST(Checkpoint, FileRoundTripAndReserialisation) {
  const auto ck = sample_checkpoint(true);
  const auto path = std::filesystem::temp_directory_path() / "lae_checkpoint_test.ckpt";
  lae::save_checkpoint(path, ck);
  const auto back = lae::load_checkpoint(path);
  std::stringstream a;
  std::stringstream b;
  lae::write_checkpoint(a, ck);
  lae::write_checkpoint(b, back);
  EXPECT_EQ(a.str(), b.str());
  std::filesystem::remove(path);
  EXPECT_THROW(lae::load_checkpoint(path), lae::IoError);
}

TEST(Checkpoint, RejectsBadMagic) {
  std::istringstream in(std::string("NOTACKPT\x01\0\0\0", 12));
  EXPECT_THROW(lae::read_checkpoint(in), lae::FormatError);
}

TEST(Checkpoint, RejectsTruncatedAndTrailingBytes) {
  std::stringstream ss;
  lae::write_checkpoint(ss, sample_checkpoint(false));
  const std::string bytes = ss.str();
  std::istringstream truncated(bytes.substr(0, bytes.size() - 5));
  EXPECT_THROW(lae::read_checkpoint(truncated), lae::FormatError);
  std::istringstream trailing(bytes + "x");
  EXPECT_THROW(lae::read_checkpoint(trailing), lae::FormatError);
}

} // namespace
