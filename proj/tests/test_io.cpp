#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <string>

#include <unistd.h>

#include "doctest.h"

#include "plca/plca.hpp"
#include "test_helpers.hpp"

using namespace plca;
namespace fs = std::filesystem;

namespace {

// Scratch directory, cleaned per test case.
struct TempDir {
    fs::path path;
    TempDir() {
        path = fs::temp_directory_path() /
               ("plca-io-test-" + std::to_string(::getpid()) + "-" +
                std::to_string(counter++));
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
    fs::path file(const std::string& name) const { return path / name; }
    static inline int counter = 0;
};

void write_text(const fs::path& p, const std::string& text) {
    std::ofstream out(p, std::ios::binary);
    out << text;
}

std::string read_text(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    return std::string(std::istreambuf_iterator<char>(in),
                       std::istreambuf_iterator<char>());
}

}  // namespace

TEST_CASE("read_matrix parses plain CSV") {
    TempDir dir;
    write_text(dir.file("m.csv"), "1,2\n3,4\n");
    const Matrix m = io::read_matrix(dir.file("m.csv"));
    REQUIRE(m.rows() == 2);
    REQUIRE(m.cols() == 2);
    CHECK(m(0, 0) == 1.0);
    CHECK(m(0, 1) == 2.0);
    CHECK(m(1, 0) == 3.0);
    CHECK(m(1, 1) == 4.0);
}

TEST_CASE("read_matrix error paths") {
    TempDir dir;
    SUBCASE("negative value names the cell") {
        write_text(dir.file("neg.csv"), "1,2\n-3,4\n");
        CHECK_THROWS_WITH_AS(io::read_matrix(dir.file("neg.csv")),
                             doctest::Contains("row 2, column 1"), ValidationError);
    }
    SUBCASE("non-finite value is rejected") {
        write_text(dir.file("inf.csv"), "1,inf\n3,4\n");
        CHECK_THROWS_AS(io::read_matrix(dir.file("inf.csv")), ValidationError);
    }
    SUBCASE("ragged rows") {
        write_text(dir.file("ragged.csv"), "1,2\n3\n");
        CHECK_THROWS_AS(io::read_matrix(dir.file("ragged.csv")), ParseError);
    }
    SUBCASE("empty file") {
        write_text(dir.file("empty.csv"), "");
        CHECK_THROWS_AS(io::read_matrix(dir.file("empty.csv")), ParseError);
    }
    SUBCASE("garbage field reports line and field") {
        write_text(dir.file("bad.csv"), "1,2\n3,x\n");
        CHECK_THROWS_WITH_AS(io::read_matrix(dir.file("bad.csv")),
                             doctest::Contains("line 2"), ParseError);
    }
    SUBCASE("missing file") {
        CHECK_THROWS_AS(io::read_matrix(dir.file("nope.csv")), IoError);
    }
}

TEST_CASE("matrix round trip is exact") {
    TempDir dir;
    SeededRng rng(71);
    for (int rep = 0; rep < 10; ++rep) {
        Matrix m(4, 3);
        for (std::size_t r = 0; r < 4; ++r) {
            for (std::size_t c = 0; c < 3; ++c) {
                m(r, c) = rng.uniform01() * std::pow(10.0, rng.uniform01() * 6 - 3);
            }
        }
        m(1, 2) = 0.0;
        const fs::path p = dir.file("round.csv");
        io::write_matrix(m, p);
        CHECK(io::read_matrix(p) == m);
    }
}

TEST_CASE("model round trip preserves every parameter") {
    TempDir dir;
    SeededRng rng(72);
    const PlcaModel model = testing::random_model(rng, 5, 4, 3);
    const fs::path p = dir.file("model.json");
    io::write_model(model, p);
    const PlcaModel back = io::read_model(p);
    CHECK(testing::max_model_diff(model, back) <= 1e-15);
    CHECK(back.events() == 5);
    CHECK(back.groups() == 4);
    CHECK(back.classes() == 3);
}

TEST_CASE("model reader rejects malformed documents") {
    TempDir dir;
    const fs::path p = dir.file("model.json");

    SUBCASE("missing field is a schema error naming the field") {
        write_text(p, R"({"format_version": 1, "dims": {"M": 1, "N": 1, "K": 1},
                          "mixture": [[1.0]], "components": [[1.0]]})");
        CHECK_THROWS_WITH_AS(io::read_model(p), doctest::Contains("group_prior"),
                             SchemaError);
    }
    SUBCASE("wrong format_version") {
        write_text(p, R"({"format_version": 2, "dims": {"M": 1, "N": 1, "K": 1},
                          "group_prior": [1.0], "mixture": [[1.0]],
                          "components": [[1.0]]})");
        CHECK_THROWS_AS(io::read_model(p), VersionError);
    }
    SUBCASE("not JSON at all") {
        write_text(p, "not json");
        CHECK_THROWS_AS(io::read_model(p), ParseError);
    }
    SUBCASE("wrong array length") {
        write_text(p, R"({"format_version": 1, "dims": {"M": 2, "N": 2, "K": 1},
                          "group_prior": [0.5, 0.5], "mixture": [[1.0, 1.0]],
                          "components": [[1.0], [1.0], [1.0]]})");
        CHECK_THROWS_AS(io::read_model(p), SchemaError);
    }
    SUBCASE("invariant violation") {
        write_text(p, R"({"format_version": 1, "dims": {"M": 2, "N": 1, "K": 1},
                          "group_prior": [1.0], "mixture": [[1.0]],
                          "components": [[0.9], [0.4]]})");
        CHECK_THROWS_AS(io::read_model(p), ValidationError);
    }
}

TEST_CASE("corpus round trip") {
    TempDir dir;
    const PlcaModel model = testing::positive_model_2x2x2();
    const SampleCorpus corpus = sample_corpus(model, 100, 5);
    const fs::path p = dir.file("corpus.txt");
    io::write_corpus(corpus, 2, 2, p);

    const io::CorpusFile back = io::read_corpus(p);
    CHECK(back.events == 2);
    CHECK(back.groups == 2);
    CHECK(back.corpus.seed == 5);
    CHECK(back.corpus.pairs == corpus.pairs);
}

TEST_CASE("corpus file format details") {
    TempDir dir;
    const fs::path p = dir.file("corpus.txt");

    SUBCASE("header line layout") {
        SampleCorpus corpus;
        corpus.seed = 42;
        corpus.pairs = {{0, 1}};
        io::write_corpus(corpus, 2, 3, p);
        CHECK(read_text(p) == "# plca-corpus v1 M=2 N=3 seed=42\n0 1\n");
    }
    SUBCASE("unsupported version") {
        write_text(p, "# plca-corpus v2 M=2 N=2 seed=0\n0 0\n");
        CHECK_THROWS_AS(io::read_corpus(p), VersionError);
    }
    SUBCASE("missing header") {
        write_text(p, "0 0\n");
        CHECK_THROWS_AS(io::read_corpus(p), ParseError);
    }
    SUBCASE("out-of-range pair") {
        write_text(p, "# plca-corpus v1 M=2 N=2 seed=0\n2 0\n");
        CHECK_THROWS_AS(io::read_corpus(p), ValidationError);
    }
    SUBCASE("malformed pair line") {
        write_text(p, "# plca-corpus v1 M=2 N=2 seed=0\n0\n");
        CHECK_THROWS_AS(io::read_corpus(p), ParseError);
    }
}

TEST_CASE("trace writing and parsing") {
    TempDir dir;
    const fs::path p = dir.file("trace.csv");

    SUBCASE("single-iteration trace has header, one row, and the comment") {
        FitTrace trace;
        trace.records.push_back({1, 0.5, 0.25, 0.125, 1.5});
        trace.termination = Termination::converged;
        io::write_trace(trace, p);
        CHECK(read_text(p) ==
              "iter,fobj,kld,max_param_delta,wall_ms\n"
              "1,0.5,0.25,0.125,1.5\n"
              "# terminated: converged\n");
    }
    SUBCASE("round trip including an infinite divergence") {
        FitTrace trace;
        trace.records.push_back({1, 2.5, std::numeric_limits<double>::infinity(), 0.5, 0.25});
        trace.records.push_back({2, 1.25, 0.75, 0.25, 0.125});
        trace.termination = Termination::max_iters;
        io::write_trace(trace, p);
        const FitTrace back = io::read_trace(p);
        REQUIRE(back.records.size() == 2);
        CHECK(back.termination == Termination::max_iters);
        CHECK(back.records[0].kld == std::numeric_limits<double>::infinity());
        CHECK(back.records[0].fobj == 2.5);
        CHECK(back.records[1].iter == 2);
        CHECK(back.records[1].wall_ms == 0.125);
    }
    SUBCASE("empty trace is rejected") {
        FitTrace trace;
        CHECK_THROWS_AS(io::write_trace(trace, p), ValidationError);
    }
    SUBCASE("parsed-back real fit trace has a non-increasing objective") {
        SeededRng rng(73);
        const auto pi = testing::random_empirical(rng, 5, 4);
        FitConfig cfg;
        cfg.k = 2;
        cfg.seed = 13;
        cfg.max_iters = 100;
        const FitResult result = fit(pi, cfg);
        io::write_trace(result.trace, p);
        const FitTrace back = io::read_trace(p);
        for (std::size_t i = 1; i < back.records.size(); ++i) {
            CHECK(back.records[i].fobj <= back.records[i - 1].fobj + 1e-10);
        }
        CHECK(back.termination == result.trace.termination);
    }
}

TEST_CASE("model file uses 17-significant-digit numbers") {
    TempDir dir;
    // 1/3 is not exactly representable; the file must carry enough digits to
    // reproduce the stored double exactly
    PlcaModel model({1.0}, Matrix::from_rows({{1.0}}),
                    Matrix::from_rows({{1.0 / 3.0}, {2.0 / 3.0}}));
    const fs::path p = dir.file("model.json");
    io::write_model(model, p);
    const std::string text = read_text(p);
    CHECK(text.find("0.33333333333333331") != std::string::npos);
    const PlcaModel back = io::read_model(p);
    CHECK(back.components()(0, 0) == model.components()(0, 0));
}
