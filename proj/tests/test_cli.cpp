#include <catch2/catch_amalgamated.hpp>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <string>

#include "subseg/corpus_io.hpp"
#include "support/test_util.hpp"

// Drives the built CLI binary end to end with golden outputs on the toy
// corpus. SUBSEG_CLI_PATH is injected by the build.

namespace {

struct RunResult {
  int exit_code = -1;
  std::string out;
  std::string err;
};

RunResult run(const std::string& args, const std::string& stdin_data = "") {
  test_util::TempFile out_f("cli_out"), err_f("cli_err"), in_f("cli_in");
  in_f.write(stdin_data);
  const std::string cmd = std::string(SUBSEG_CLI_PATH) + " " + args + " < " + in_f.path() +
                          " > " + out_f.path() + " 2> " + err_f.path();
  const int status = std::system(cmd.c_str());
  RunResult r;
  r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  r.out = out_f.read();
  r.err = err_f.read();
  return r;
}

// ln 0.6 / ln 0.4: the toy model used throughout the worked examples
const char* kToyModel = "-0.51082562376599072\ta\n-0.91629073187415511\taa\n";

}  // namespace

TEST_CASE("help exits 0 on every subcommand and documents the flags") {
  REQUIRE(run("--help").exit_code == 0);
  for (const std::string sub : {"train", "segment", "sample", "eval", "inspect"}) {
    const RunResult r = run(sub + " --help");
    REQUIRE(r.exit_code == 0);
  }
  const RunResult train_help = run("train --help");
  for (const std::string flag :
       {"--input", "--method", "--criterion", "--alpha", "--lexicon-size", "--prior", "--em",
        "--dampening", "--forcesplit-before", "--forcesplit-after", "--seed-size", "--rng-seed",
        "--output", "--threads", "--config", "--quota"})
    REQUIRE(train_help.out.find(flag) != std::string::npos);
  const RunResult seg_help = run("segment --help");
  for (const std::string flag : {"--model", "--nbest", "--marker"})
    REQUIRE(seg_help.out.find(flag) != std::string::npos);
}

TEST_CASE("segment golden output on the toy model") {
  test_util::TempFile model("model");
  model.write(kToyModel);
  const RunResult r = run("segment --model " + model.path(), "aaa\n");
  REQUIRE(r.exit_code == 0);
  REQUIRE(r.out == "aa a\n");

  const RunResult nb = run("segment --model " + model.path() + " --nbest 3", "aaa\n");
  REQUIRE(nb.exit_code == 0);
  REQUIRE(nb.out == "-1.427116:aa a\t-1.427116:a aa\t-1.532477:a a a\n");

  const RunResult bm = run("segment --model " + model.path() + " --boundary-marker @@", "aaa\n");
  REQUIRE(bm.out == "aa@@ a\n");

  // empty input: empty output, success
  const RunResult empty = run("segment --model " + model.path(), "");
  REQUIRE(empty.exit_code == 0);
  REQUIRE(empty.out.empty());
}

TEST_CASE("segment flags OOV code points but still emits output") {
  test_util::TempFile model("model");
  model.write(kToyModel);
  const RunResult r = run("segment --model " + model.path(), "axa\n");
  REQUIRE(r.exit_code == 0);
  REQUIRE(r.out == "a x a\n");
  REQUIRE(r.err.find("OOV") != std::string::npos);
}

TEST_CASE("sample is deterministic given the seed") {
  test_util::TempFile model("model");
  model.write(kToyModel);
  const RunResult a = run("sample --model " + model.path() + " --rng-seed 12 --n 5", "aaa\n");
  const RunResult b = run("sample --model " + model.path() + " --rng-seed 12 --n 5", "aaa\n");
  REQUIRE(a.exit_code == 0);
  REQUIRE(a.out == b.out);
  REQUIRE(std::count(a.out.begin(), a.out.end(), '\n') == 5);

  const RunResult none = run("sample --model " + model.path() + " --rng-seed 12 --n 0", "aaa\n");
  REQUIRE(none.out.empty());
  REQUIRE(none.exit_code == 0);

  // a missing --rng-seed is a configuration error
  REQUIRE(run("sample --model " + model.path(), "aaa\n").exit_code == 2);
}

TEST_CASE("train is byte-identical across runs and thread counts") {
  test_util::TempFile counts("counts"), m1("m1"), m2("m2"), h1("h1"), h2("h2");
  counts.write("5\tsinging\n3\twalking\n2\tsings\n4\twalks\n1\ttalking\n2\ttalks\n");
  const std::string base = "train --input " + counts.path() +
                           " --method emprune --criterion mdl --alpha 1.0 --dampening ones"
                           " --seed-size 200 --max-rounds 3 --rng-seed 7";
  REQUIRE(run(base + " --threads 1 --output " + m1.path() + " --history " + h1.path()).exit_code ==
          0);
  REQUIRE(run(base + " --threads 4 --output " + m2.path() + " --history " + h2.path()).exit_code ==
          0);
  REQUIRE(m1.read() == m2.read());
  REQUIRE(h1.read() == h2.read());
  REQUIRE(!m1.read().empty());
  REQUIRE(h1.read().find("round,lexicon_size,prior,likelihood,weighted,alpha,pruned") == 0);
}

TEST_CASE("train validation failures exit with code 2") {
  test_util::TempFile counts("counts"), model("model");
  counts.write("1\tab\n");
  // missing --alpha with the mdl criterion
  REQUIRE(run("train --input " + counts.path() + " --output " + model.path() +
              " --criterion mdl")
              .exit_code == 2);
  // mdl with noprior
  REQUIRE(run("train --input " + counts.path() + " --output " + model.path() +
              " --criterion mdl --alpha 1 --prior noprior")
              .exit_code == 2);
  // unknown flag
  REQUIRE(run("train --input " + counts.path() + " --output " + model.path() +
              " --no-such-flag")
              .exit_code == 2);
  // unreadable input is a runtime error, not a config error
  REQUIRE(run("train --input /nonexistent --output " + model.path() +
              " --criterion mdl --alpha 1")
              .exit_code == 1);
}

TEST_CASE("sentencepiece-style invocation from the worked example") {
  test_util::TempFile counts("counts"), model("model");
  counts.write("5\tsinging\n3\twalking\n2\tsings\n4\twalks\n");
  const RunResult r =
      run("train --input " + counts.path() + " --output " + model.path() +
          " --method emprune --prior noprior --criterion size --lexicon-size 12"
          " --em viterbi-prune --dampening none --stop-threshold 0");
  REQUIRE(r.exit_code == 0);
  const subseg::UnigramModel m = subseg::read_model(model.path());
  REQUIRE(m.lexicon().size() == 12);
}

TEST_CASE("config file supplies defaults, flags win") {
  test_util::TempFile counts("counts"), model("model"), cfg("cfg"), hist("hist");
  counts.write("5\tsinging\n3\twalking\n2\tsings\n4\twalks\n");
  cfg.write("# training defaults\nmethod = emprune\ncriterion = size\nlexicon-size = 12\n"
            "prior = noprior\ndampening = none\nstop-threshold = 0\n");
  const RunResult r = run("train --input " + counts.path() + " --output " + model.path() +
                          " --history " + hist.path() + " --config " + cfg.path() +
                          " --lexicon-size 10");
  REQUIRE(r.exit_code == 0);
  const subseg::UnigramModel m = subseg::read_model(model.path());
  REQUIRE(m.lexicon().size() == 10);  // the flag overrode the file's 12
}

TEST_CASE("baseline training via the CLI") {
  test_util::TempFile counts("counts"), model("model"), hist("hist");
  counts.write("5\tsinging\n3\twalking\n2\tsings\n4\twalks\n");
  const RunResult r = run("train --input " + counts.path() + " --output " + model.path() +
                          " --history " + hist.path() +
                          " --method baseline --alpha 0.5 --rng-seed 3 --dampening ones");
  REQUIRE(r.exit_code == 0);
  REQUIRE(hist.read().find("round,") == 0);
  REQUIRE_NOTHROW(subseg::read_model(model.path()));
}

TEST_CASE("eval bpr: identical files score 100/100/100") {
  test_util::TempFile hyp("hyp"), gold("gold"), csv("csv");
  hyp.write("reli abil ity\ncat s\n");
  gold.write("reliability\treli abil ity\ncats\tcat s\n");
  const RunResult r = run("eval --mode bpr --hypothesis " + hyp.path() + " --gold " +
                          gold.path() + " --csv " + csv.path());
  REQUIRE(r.exit_code == 0);
  REQUIRE(r.out.find("100.00") != std::string::npos);
  REQUIRE(csv.read().find("Pre,Rec,F\n100,100,100\n") == 0);
}

TEST_CASE("eval cost mode emits the prior/likelihood/weighted breakdown") {
  test_util::TempFile counts("counts"), seg("seg"), csv("csv");
  counts.write("1\taaa\n");
  seg.write("aa a\n");
  const RunResult r = run("eval --mode cost --input " + counts.path() + " --segmentation " +
                          seg.path() + " --dampening none --prior noprior --alpha 1 --csv " +
                          csv.path());
  REQUIRE(r.exit_code == 0);
  REQUIRE(r.out.find("Prior") != std::string::npos);
  // likelihood = 2 ln 2
  REQUIRE(csv.read().find("prior,likelihood,weighted,alpha\n0,1.3862943611198906,") !=
          std::string::npos);
}

TEST_CASE("eval errors mode: character segmentation recovers every boundary") {
  test_util::TempFile hyp("hyp"), gold("gold");
  hyp.write("r e l i\nc a t s\n");
  gold.write("reli\tre|PRE li|STM\ncats\tcat|STM s|SUF\n");
  const RunResult r = run("eval --mode errors --hypothesis " + hyp.path() + " --gold " +
                          gold.path());
  REQUIRE(r.exit_code == 0);
  REQUIRE(r.out.find("REC/TOT") != std::string::npos);
  REQUIRE(r.out.find("100.00") != std::string::npos);
}

TEST_CASE("eval missing words exit 1 and name the word") {
  test_util::TempFile hyp("hyp"), gold("gold");
  hyp.write("x y\n");
  gold.write("reli\tre li\n");
  const RunResult r =
      run("eval --mode bpr --hypothesis " + hyp.path() + " --gold " + gold.path());
  REQUIRE(r.exit_code == 1);
  REQUIRE(r.err.find("reli") != std::string::npos);
}

TEST_CASE("inspect summarizes a model") {
  test_util::TempFile model("model");
  model.write(kToyModel);
  const RunResult r = run("inspect --model " + model.path());
  REQUIRE(r.exit_code == 0);
  REQUIRE(r.out.find("lexicon size:    2") != std::string::npos);
  REQUIRE(r.out.find("protected:       1") != std::string::npos);
}

TEST_CASE("seed lexicon dump") {
  test_util::TempFile counts("counts"), model("model"), dump("dump");
  counts.write("1\taaa\n");
  const RunResult r = run("train --input " + counts.path() + " --output " + model.path() +
                          " --criterion mdl --alpha 1.0 --dampening none --dump-seed " +
                          dump.path());
  REQUIRE(r.exit_code == 0);
  REQUIRE(dump.read() == "3\ta\n2\taa\n1\taaa\n");
}

TEST_CASE("forcesplit flags take character sets") {
  test_util::TempFile counts("counts"), model("model");
  counts.write("5\tab-cd\n3\tab-ce\n2\tabcd\n4\twomen's-rights\n");
  const RunResult r = run("train --input " + counts.path() + " --output " + model.path() +
                          " --criterion mdl --alpha 1.0 --forcesplit-before \"-'\" "
                          "--forcesplit-after - --dampening none --seed-size 300");
  REQUIRE(r.exit_code == 0);
  const subseg::UnigramModel m = subseg::read_model(model.path());
  // no lexicon entry spans a hyphen, and nothing follows an apostrophe
  for (const auto& s : m.lexicon().entries()) {
    if (s.size() < 2) continue;
    for (size_t i = 0; i < s.size(); ++i) {
      REQUIRE(s[i] != U'-');
      if (i > 0) REQUIRE(s[i] != U'\'');
    }
  }
  // segmenting splits on both sides of '-' and before '\''
  const RunResult seg = run("segment --model " + model.path(), "women's-rights\n");
  REQUIRE(seg.exit_code == 0);
  std::vector<int> boundaries;
  int pos = 0;
  for (char ch : seg.out) {
    if (ch == ' ')
      boundaries.push_back(pos);
    else if (ch != '\n')
      ++pos;
  }
  for (int b : {5, 7, 8})  // before ', around -
    REQUIRE(std::find(boundaries.begin(), boundaries.end(), b) != boundaries.end());
}
