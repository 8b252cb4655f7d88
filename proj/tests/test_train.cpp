#include <gtest/gtest.h>

#include <unistd.h>

#include <filesystem>

#include "fairrob/checkpoint.hpp"
#include "fairrob/train.hpp"

namespace {

using namespace fairrob;
namespace fs = std::filesystem;

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() / ("fairrob_tr_" + std::to_string(::getpid()));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string file(const std::string& name) const { return (path / name).string(); }
};

TEST(Train, ReducesLossAndIsDeterministic) {
  const auto ds = sample_mixture(MixtureSampleConfig(GaussianMixtureSpec(-1, 1, 3), 2000, 3));
  const Architecture arch(1, {}, Activation::tanh_, 2);
  TrainConfig cfg;
  cfg.lr = 0.05;
  cfg.epochs = 15;
  cfg.seed = 1;

  const auto r1 = sgd_train(arch, ds, LossKind::cross_entropy, {}, {}, cfg);
  const auto r2 = sgd_train(arch, ds, LossKind::cross_entropy, {}, {}, cfg);
  EXPECT_FALSE(r1.diverged);
  EXPECT_EQ(r1.model.params, r2.model.params);
  EXPECT_DOUBLE_EQ(r1.final_loss, r2.final_loss);

  const auto init = init_params(arch, cfg.seed);
  std::vector<std::size_t> all(ds.n);
  std::iota(all.begin(), all.end(), 0);
  const double loss0 = batch_objective(init, {&ds, all}, LossKind::cross_entropy, {}, {}).value;
  EXPECT_LT(r1.final_loss, loss0);
}

TEST(Train, StratifiedBatchesKeepGroupsPresent) {
  // skewed groups; penalty mode requires both groups in every batch
  const auto ds =
      sample_mixture(MixtureSampleConfig(GaussianMixtureSpec(-1, 1, 3, 0.2), 1200, 9));
  FairnessConfig pen;
  pen.mode = FairnessMode::penalty;
  pen.lambda = 0.5;
  TrainConfig cfg;
  cfg.lr = 0.02;
  cfg.epochs = 3;
  cfg.batch_size = 16;
  const Architecture arch(1, {}, Activation::tanh_, 2);
  EXPECT_NO_THROW(sgd_train(arch, ds, LossKind::cross_entropy, pen, {}, cfg));
}

TEST(Train, DivergenceIsFlaggedNotThrown) {
  const auto ds = sample_mixture(MixtureSampleConfig(GaussianMixtureSpec(-1, 1, 5), 512, 4));
  TrainConfig cfg;
  cfg.lr = 1e6;  // blows up exp_loss immediately
  cfg.epochs = 4;
  const auto r = sgd_train(Architecture(1, {}, Activation::tanh_, 2), ds,
                           LossKind::exp_loss, {}, {}, cfg);
  EXPECT_TRUE(r.diverged);
}

TEST(Train, InducedThresholdHelpers) {
  SmallModel model(Architecture(1, {}, Activation::tanh_, 2), {-2.0, 2.0, 1.0, -1.0});
  // scores equal where 4x - 2 = 0
  EXPECT_DOUBLE_EQ(induced_threshold(model), 0.5);
  SmallModel degenerate(Architecture(1, {}, Activation::tanh_, 2), {1.0, 1.0, 0.0, 0.0});
  EXPECT_THROW(induced_threshold(degenerate), Error);
  const auto mlp = init_params(Architecture(1, {4}, Activation::tanh_, 2), 0);
  EXPECT_THROW(induced_threshold(mlp), Error);
}

TEST(Checkpoint, RoundTrip) {
  TempDir tmp;
  const auto model = init_params(Architecture(3, {5, 4}, Activation::relu, 3), 77);
  save_checkpoint(model, tmp.file("m.ckpt"), {{"note", "test"}});
  const auto back = load_checkpoint(tmp.file("m.ckpt"));
  EXPECT_EQ(back.params, model.params);
  EXPECT_EQ(back.arch.hidden, model.arch.hidden);
  EXPECT_EQ(back.arch.activation, model.arch.activation);
  EXPECT_EQ(back.arch.num_classes, model.arch.num_classes);
  // sidecar exists and carries the architecture
  std::ifstream side(tmp.file("m.ckpt") + ".json");
  ASSERT_TRUE(side.good());
  nlohmann::json j;
  side >> j;
  EXPECT_EQ(j["architecture"]["input_dim"].get<int>(), 3);
  EXPECT_EQ(j["note"].get<std::string>(), "test");
}

TEST(Checkpoint, CorruptedMagicAndVersion) {
  TempDir tmp;
  const auto model = init_params(Architecture(2, {}, Activation::tanh_, 2), 1);
  save_checkpoint(model, tmp.file("m.ckpt"));
  {
    std::fstream f(tmp.file("m.ckpt"),
                   std::ios::binary | std::ios::in | std::ios::out);
    f.seekp(0);
    f.write("XXXX", 4);
  }
  EXPECT_THROW(load_checkpoint(tmp.file("m.ckpt")), Error);

  save_checkpoint(model, tmp.file("v.ckpt"));
  {
    std::fstream f(tmp.file("v.ckpt"),
                   std::ios::binary | std::ios::in | std::ios::out);
    f.seekp(4);
    const std::uint32_t bad = 99;
    f.write(reinterpret_cast<const char*>(&bad), 4);
  }
  EXPECT_THROW(load_checkpoint(tmp.file("v.ckpt")), Error);

  // truncated parameter block
  save_checkpoint(model, tmp.file("t.ckpt"));
  fs::resize_file(tmp.file("t.ckpt"), fs::file_size(tmp.file("t.ckpt")) - 9);
  EXPECT_THROW(load_checkpoint(tmp.file("t.ckpt")), Error);

  EXPECT_THROW(load_checkpoint(tmp.file("absent.ckpt")), Error);
}

}  // namespace
