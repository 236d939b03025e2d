#include <doctest.h>

#include <filesystem>

#include "tromux/rng.hpp"
#include "tromux/util.hpp"

using namespace tromux;

TEST_CASE("trim strips surrounding whitespace only") {
    CHECK(trim("  a b \t") == "a b");
    CHECK(trim("\t\r\n") == "");
    CHECK(trim("") == "");
    CHECK(trim("x") == "x");
}

TEST_CASE("split_ws collapses runs of whitespace") {
    CHECK(split_ws("a  b\tc") == std::vector<std::string>{"a", "b", "c"});
    CHECK(split_ws("  lead trail  ") == std::vector<std::string>{"lead", "trail"});
    CHECK(split_ws("").empty());
}

TEST_CASE("split_on keeps empty fields") {
    CHECK(split_on("a,b,,c", ',') == std::vector<std::string>{"a", "b", "", "c"});
    CHECK(split_on("solo", ',') == std::vector<std::string>{"solo"});
}

TEST_CASE("starts_with") {
    CHECK(starts_with("tromux_key3", "tromux_"));
    CHECK_FALSE(starts_with("tro", "tromux_"));
}

TEST_CASE("text file round trip and open error") {
    auto path = std::filesystem::temp_directory_path() / "tromux_util_test.txt";
    write_text_file(path.string(), "line1\nline2\n");
    CHECK(read_text_file(path.string()) == "line1\nline2\n");
    std::filesystem::remove(path);
    CHECK_THROWS_AS(read_text_file(path.string()), ValidationError);
    CHECK_THROWS_WITH_AS(read_text_file("/nonexistent/nowhere.txt"),
                         "cannot open file: /nonexistent/nowhere.txt", ValidationError);
}

TEST_CASE("rng determinism and ranges") {
    Rng a(7), b(7), c(8);
    bool same = true, differs = false;
    for (int i = 0; i < 64; ++i) {
        uint64_t va = a.next_u64();
        same = same && va == b.next_u64();
        differs = differs || va != c.next_u64();
    }
    CHECK(same);
    CHECK(differs);

    Rng r(1);
    for (int i = 0; i < 1000; ++i) {
        CHECK(r.below(7) < 7);
        double u = r.unit();
        CHECK(u >= 0.0);
        CHECK(u < 1.0);
    }
    CHECK(r.below(1) == 0);
}

TEST_CASE("rng coin is roughly fair") {
    Rng r(42);
    int heads = 0;
    for (int i = 0; i < 10000; ++i) heads += r.coin();
    CHECK(heads > 4700);
    CHECK(heads < 5300);
}

TEST_CASE("mix derives distinct stable substream seeds") {
    CHECK(Rng::mix(1, 2) == Rng::mix(1, 2));
    CHECK(Rng::mix(1, 2) != Rng::mix(2, 1));
    CHECK(Rng::mix(0, 0) != Rng::mix(0, 1));
}
