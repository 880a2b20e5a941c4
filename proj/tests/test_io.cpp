#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>

#include "hord/forms.hpp"
#include "hord/table_io.hpp"

using namespace hord;
namespace fs = std::filesystem;

namespace {

struct TempDir {
    fs::path path;
    TempDir() {
        path = fs::temp_directory_path() / ("hord-test-" + std::to_string(::getpid()) + "-" +
                                            std::to_string(rand()));
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
};

}  // namespace

TEST_CASE("text round-trip reproduces build_delta_table") {
    TempDir tmp;
    auto table = forms::build_delta_table(100);
    auto p = (tmp.path / "delta.tbl").string();
    io::write_text(table, p);
    auto loaded = io::ingest_table(p);
    REQUIRE(loaded.n_max() == 100);
    for (uint64_t n = 1; n <= 100; ++n) CHECK(loaded.at(n) == table.at(n));
    CHECK(loaded.form().weight == 12);
    CHECK(loaded.form().source == forms::Source::ExternalTable);
}

TEST_CASE("ingest rejects multiplicativity violation at (2,3)") {
    TempDir tmp;
    auto p = (tmp.path / "bad.tbl").string();
    {
        auto table = forms::build_delta_table(10);
        std::ofstream out(p);
        out << "#form label=bad weight=12 level=1 nmax=10\n";
        for (uint64_t n = 1; n <= 10; ++n)
            out << n << '\t' << (n == 6 ? table.at(6) + 1 : table.at(n)).get_str() << '\n';
    }
    try {
        io::ingest_table(p);
        FAIL("expected InvariantViolation");
    } catch (const InvariantViolation& e) {
        CHECK(std::string(e.what()).find("(m=2, n=3)") != std::string::npos);
    }
}

TEST_CASE("ingest rejects a Deligne violation at p=2") {
    TempDir tmp;
    auto p = (tmp.path / "deligne.tbl").string();
    {
        std::ofstream out(p);
        out << "#form label=bad weight=12 level=1 nmax=3\n";
        out << "1\t1\n2\t91\n3\t252\n";  // 91^2 > 4*2^11
    }
    try {
        io::ingest_table(p);
        FAIL("expected InvariantViolation");
    } catch (const InvariantViolation& e) {
        std::string msg = e.what();
        CHECK(msg.find("Deligne") != std::string::npos);
        CHECK(msg.find("p=2") != std::string::npos);
    }
}

TEST_CASE("ingest rejects malformed files") {
    TempDir tmp;
    auto p = (tmp.path / "parse.tbl").string();
    {
        std::ofstream out(p);
        out << "#form label=x weight=12 level=1 nmax=3\n1\t1\n3\t252\n";  // gap at n=2
    }
    CHECK_THROWS_AS(io::read_text(p), ParseError);
    {
        std::ofstream out(p);
        out << "no header\n";
    }
    CHECK_THROWS_AS(io::read_text(p), ParseError);
    {
        std::ofstream out(p);
        out << "#form label=x weight=12 level=12 nmax=1\n1\t1\n";  // 12 = 2^2*3 not squarefree
    }
    CHECK_THROWS_AS(io::read_text(p), InvariantViolation);
}

TEST_CASE("binary cache round-trip is bit-identical") {
    TempDir tmp;
    auto table = forms::build_delta_table(500);
    auto p = (tmp.path / "delta.hord").string();
    io::write_cache(table, p);
    auto loaded = io::read_cache(p);
    REQUIRE(loaded.n_max() == 500);
    for (uint64_t n = 1; n <= 500; ++n) CHECK(loaded.at(n) == table.at(n));
}

TEST_CASE("truncated cache fails the checksum and is rebuilt") {
    TempDir tmp;
    auto table = forms::build_delta_table(200);
    io::store_cached(tmp.path.string(), table);
    auto p = io::cache_path(tmp.path.string(), "delta", 12, 1);
    // truncate
    auto size = fs::file_size(p);
    fs::resize_file(p, size - 7);
    CHECK_THROWS_AS(io::read_cache(p), CacheError);
    // load_cached falls back to a miss and removes the corrupt file
    auto missing = io::load_cached(tmp.path.string(), "delta", 12, 1, 100);
    CHECK_FALSE(missing.has_value());
    CHECK_FALSE(fs::exists(p));
}

TEST_CASE("cache extension keeps the prefix unchanged") {
    TempDir tmp;
    auto small = forms::build_delta_table(64);
    io::store_cached(tmp.path.string(), small);
    auto big = forms::build_delta_table(256);
    io::store_cached(tmp.path.string(), big);
    auto loaded = io::load_cached(tmp.path.string(), "delta", 12, 1, 64);
    REQUIRE(loaded.has_value());
    for (uint64_t n = 1; n <= 64; ++n) CHECK(loaded->at(n) == small.at(n));
    // longer request than stored: miss
    CHECK_FALSE(io::load_cached(tmp.path.string(), "delta", 12, 1, 512).has_value());
}
