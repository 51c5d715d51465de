#include <doctest.h>

#include <sstream>

#include "test_support.hpp"
#include "zsl/cli.hpp"
#include "zsl/dataset_io.hpp"

using zsl::testing::BlockSignalProblem;
using zsl::testing::TempDir;

namespace {

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run run(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = zsl::run_cli(args, out, err);
  return {code, out.str(), err.str()};
}

std::size_t count_lines(const std::string& s) { return static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n')); }

BlockSignalProblem small_problem() {
  zsl::testing::SyntheticSpec s;
  s.classes = 10;
  s.seen = 6;
  s.validation = 2;
  s.per_class = 12;
  s.class_dim = 5;
  s.image_dim = 8;
  return zsl::testing::make_block_signal_problem(s);
}

const std::string kFast = "batch_size=16\nmax_iterations=40\neval_every=10\nlearning_rate=0.01\n";

}  // namespace

TEST_CASE("usage errors exit with 2, help with 0") {
  CHECK(run({}).code == 2);
  CHECK(run({"frobnicate"}).code == 2);
  CHECK(run({"train"}).code == 2);
  CHECK(run({"train", "-c", "x.cfg", "--bogus"}).code == 2);
  CHECK(run({"--help"}).code == 0);
  CHECK(run({"train", "--help"}).code == 0);
}

TEST_CASE("validate on a consistent fixture") {
  TempDir dir("cli_validate");
  const auto cfg = zsl::testing::write_block_signal_fixture(dir, small_problem(), kFast);
  const Run r = run({"validate", "-c", cfg.string()});
  CHECK(r.code == 0);
  CHECK(r.out == "ok\n");
}

TEST_CASE("overlapping splits are rejected by validate and train") {
  TempDir dir("cli_overlap");
  auto p = small_problem();
  p.base.splits.zsl_validation.push_back(p.base.splits.seen.front());
  const auto cfg = zsl::testing::write_block_signal_fixture(dir, p, kFast + "checkpoint=model.ckpt\n");
  const Run v = run({"validate", "-c", cfg.string()});
  CHECK(v.code == 1);
  CHECK(v.out.find("split\t") != std::string::npos);
  const Run t = run({"train", "-c", cfg.string()});
  CHECK(t.code == 1);
  CHECK(t.err.find("split-violation") != std::string::npos);
  CHECK_FALSE(std::filesystem::exists(dir / "model.ckpt"));
}

TEST_CASE("library errors exit with 1") {
  TempDir dir("cli_errors");
  const auto cfg = zsl::testing::write_block_signal_fixture(dir, small_problem(), kFast);
  CHECK(run({"train", "-c", (dir / "missing.cfg").string()}).code == 1);
  CHECK(run({"train", "-c", cfg.string(), "--set", "nonsense=1"}).code == 1);
  CHECK(run({"train", "-c", cfg.string(), "--set", "eval_every=1000"}).code == 1);
  CHECK(run({"eval", "-c", cfg.string(), "--checkpoint", (dir / "none.ckpt").string()}).code == 1);
}

TEST_CASE("embed writes one row per class") {
  TempDir dir("cli_embed");
  const auto cfg = zsl::testing::write_block_signal_fixture(dir, small_problem(), kFast);
  const Run r = run({"embed", "-c", cfg.string()});
  REQUIRE(r.code == 0);
  CHECK(r.out.rfind("zsl-class-embeddings m=", 0) == 0);
  CHECK(count_lines(r.out) == 11);
  const Run w = run({"embed", "-c", cfg.string(), "--set", "embedding_sources=word", "-o", (dir / "emb.txt").string()});
  REQUIRE(w.code == 0);
  const auto loaded = zsl::load_class_embeddings(dir / "emb.txt");
  CHECK(loaded.size() == 10);
  CHECK(loaded.front().vector.size() == 5);
}

TEST_CASE("train, eval and predict") {
  TempDir dir("cli_train");
  const auto cfg = zsl::testing::write_block_signal_fixture(dir, small_problem(),
                                                           kFast + "checkpoint=model.ckpt\nreport=train.json\n");
  const Run t = run({"train", "-c", cfg.string(), "--seed", "3"});
  REQUIRE(t.code == 0);
  CHECK(t.out.rfind("iteration\ttrain_nll\tvalidation_accuracy\n", 0) == 0);
  CHECK(count_lines(t.out) == 1 + 4 + 2);
  CHECK(std::filesystem::exists(dir / "model.ckpt"));
  const std::string report = zsl::testing::read_bytes(dir / "train.json");
  CHECK(report.find("\"seed\": 3") != std::string::npos);

  const Run e = run({"eval", "-c", cfg.string(), "--split", "zsl_test", "--report", (dir / "eval.json").string()});
  REQUIRE(e.code == 0);
  CHECK(e.out.find("normalized_accuracy\t") != std::string::npos);
  CHECK(count_lines(e.out) == 1 + 2 + 1);
  CHECK(std::filesystem::exists(dir / "eval.json"));
  CHECK(run({"eval", "-c", cfg.string(), "--split", "seen"}).code == 1);

  const Run p = run({"predict", "-c", cfg.string()});
  REQUIRE(p.code == 0);
  CHECK(count_lines(p.out) == 1 + 120);
}

TEST_CASE("train output is byte-identical across runs") {
  TempDir dir("cli_determinism");
  const auto cfg = zsl::testing::write_block_signal_fixture(dir, small_problem(), kFast);
  std::string first_ckpt, first_report, first_out;
  for (int i = 0; i < 2; ++i) {
    const Run r = run({"train", "-c", cfg.string(), "--checkpoint", (dir / "m.ckpt").string(), "--report",
                       (dir / "r.json").string(), "--threads", i == 0 ? "1" : "4"});
    REQUIRE(r.code == 0);
    if (i == 0) {
      first_ckpt = zsl::testing::read_bytes(dir / "m.ckpt");
      first_report = zsl::testing::read_bytes(dir / "r.json");
      first_out = r.out;
    } else {
      CHECK(first_ckpt == zsl::testing::read_bytes(dir / "m.ckpt"));
      CHECK(first_report == zsl::testing::read_bytes(dir / "r.json"));
      CHECK(first_out == r.out);
    }
  }
}

TEST_CASE("ablate prints seven and four rows") {
  TempDir dir("cli_ablate");
  const auto cfg = zsl::testing::write_block_signal_fixture(dir, small_problem(), kFast);
  const Run emb = run({"ablate", "-c", cfg.string(), "--grid", "embeddings"});
  REQUIRE(emb.code == 0);
  CHECK(emb.out.rfind("attribute\ttaxonomy\tword\tnormalized_accuracy\tstddev\n", 0) == 0);
  CHECK(count_lines(emb.out) == 8);
  const Run lin = run({"ablate", "-c", cfg.string(), "--grid", "linear", "--report", (dir / "a.json").string()});
  REQUIRE(lin.code == 0);
  CHECK(lin.out.rfind("use_wx\tuse_wy\tnormalized_accuracy\tstddev\n", 0) == 0);
  CHECK(count_lines(lin.out) == 5);
  CHECK(std::filesystem::exists(dir / "a.json"));
  CHECK(run({"ablate", "-c", cfg.string(), "--grid", "everything"}).code == 1);
}
