#include "hord/table_io.hpp"

#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <vector>

#include "hord/primes.hpp"

namespace hord::io {

namespace {

constexpr char kMagic[5] = {'H', 'O', 'R', 'D', '1'};

uint64_t fnv1a(const unsigned char* data, size_t len, uint64_t h = 0xcbf29ce484222325ull) {
    for (size_t i = 0; i < len; ++i) {
        h ^= data[i];
        h *= 0x100000001b3ull;
    }
    return h;
}

void put_u32(std::string& buf, uint32_t v) {
    for (int i = 0; i < 4; ++i) buf.push_back((char)((v >> (8 * i)) & 0xff));
}
void put_u64(std::string& buf, uint64_t v) {
    for (int i = 0; i < 8; ++i) buf.push_back((char)((v >> (8 * i)) & 0xff));
}
uint32_t get_u32(const unsigned char* p) {
    uint32_t v = 0;
    for (int i = 3; i >= 0; --i) v = (v << 8) | p[i];
    return v;
}
uint64_t get_u64(const unsigned char* p) {
    uint64_t v = 0;
    for (int i = 7; i >= 0; --i) v = (v << 8) | p[i];
    return v;
}

bool squarefree_u64(uint64_t n) {
    if (n == 0) return false;
    for (uint64_t p = 2; p * p <= n; ++p) {
        if (n % p == 0) {
            n /= p;
            if (n % p == 0) return false;
        }
    }
    return true;
}

}  // namespace

void write_text(const forms::CoefficientTable& table, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open " + path + " for writing");
    const auto& f = table.form();
    out << "#form label=" << f.label << " weight=" << f.weight << " level=" << f.level
        << " nmax=" << table.n_max() << "\n";
    for (uint64_t n = 1; n <= table.n_max(); ++n)
        out << n << '\t' << table.at(n).get_str() << '\n';
    if (!out) throw std::runtime_error("write failed for " + path);
}

forms::CoefficientTable read_text(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open " + path);
    std::string line;
    if (!std::getline(in, line) || line.rfind("#form ", 0) != 0)
        throw ParseError(path + ": missing '#form' header");

    forms::FormDescriptor form;
    uint64_t declared_nmax = 0;
    {
        std::istringstream hs(line.substr(6));
        std::string tok;
        bool have_label = false, have_weight = false, have_level = false, have_nmax = false;
        while (hs >> tok) {
            auto eq = tok.find('=');
            if (eq == std::string::npos) throw ParseError(path + ": bad header token '" + tok + "'");
            std::string key = tok.substr(0, eq), value = tok.substr(eq + 1);
            if (key == "label") { form.label = value; have_label = true; }
            else if (key == "weight") { form.weight = (unsigned)std::stoul(value); have_weight = true; }
            else if (key == "level") { form.level = (unsigned)std::stoul(value); have_level = true; }
            else if (key == "nmax") { declared_nmax = std::stoull(value); have_nmax = true; }
            else throw ParseError(path + ": unknown header key '" + key + "'");
        }
        if (!have_label || !have_weight || !have_level || !have_nmax)
            throw ParseError(path + ": incomplete header");
    }
    if (form.weight == 0 || form.weight % 2 != 0)
        throw ParseError(path + ": weight must be a positive even integer");
    if (!squarefree_u64(form.level))
        throw InvariantViolation(path + ": level " + std::to_string(form.level) +
                                 " is not square-free");
    form.source = forms::Source::ExternalTable;

    std::vector<Int> coeffs;
    coeffs.reserve(declared_nmax);
    uint64_t expect_n = 1;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        auto tab = line.find('\t');
        if (tab == std::string::npos) throw ParseError(path + ": missing tab in line '" + line + "'");
        uint64_t n = std::stoull(line.substr(0, tab));
        if (n != expect_n)
            throw ParseError(path + ": expected index " + std::to_string(expect_n) + ", got " +
                             std::to_string(n));
        Int a;
        if (a.set_str(line.substr(tab + 1), 10) != 0)
            throw ParseError(path + ": bad integer at n=" + std::to_string(n));
        coeffs.push_back(std::move(a));
        ++expect_n;
    }
    if (coeffs.size() != declared_nmax)
        throw ParseError(path + ": header declares nmax=" + std::to_string(declared_nmax) +
                         " but file has " + std::to_string(coeffs.size()) + " rows");
    return forms::CoefficientTable(form, std::move(coeffs));
}

forms::CoefficientTable ingest_table(const std::string& path,
                                     const std::optional<forms::FormDescriptor>& expect) {
    auto table = read_text(path);
    if (expect) {
        const auto& f = table.form();
        if (f.weight != expect->weight || f.level != expect->level || f.label != expect->label)
            throw ParseError(path + ": header (" + f.label + ", weight " +
                             std::to_string(f.weight) + ", level " + std::to_string(f.level) +
                             ") does not match the declared descriptor");
    }
    auto rep = forms::verify_invariants(table);
    if (!rep.ok) {
        std::string msg = path + ": invariant verification failed:";
        for (auto& v : rep.violations) msg += "\n  " + v;
        throw InvariantViolation(msg);
    }
    return table;
}

void write_cache(const forms::CoefficientTable& table, const std::string& path) {
    std::string buf;
    buf.append(kMagic, 5);
    put_u32(buf, table.form().weight);
    put_u32(buf, table.form().level);
    put_u64(buf, table.n_max());
    std::vector<unsigned char> bytes;
    for (uint64_t n = 1; n <= table.n_max(); ++n) {
        const Int& a = table.at(n);
        int s = sgn(a);
        buf.push_back(s < 0 ? (char)2 : (char)(s > 0 ? 1 : 0));
        size_t count = 0;
        bytes.resize((mpz_sizeinbase(a.get_mpz_t(), 2) + 7) / 8 + 1);
        if (s != 0) mpz_export(bytes.data(), &count, 1, 1, 0, 0, a.get_mpz_t());
        put_u32(buf, (uint32_t)count);
        buf.append((const char*)bytes.data(), count);
    }
    uint64_t sum = fnv1a((const unsigned char*)buf.data() + 5, buf.size() - 5);
    put_u64(buf, sum);

    const std::string tmp = path + ".tmp";
    std::ofstream out(tmp, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open " + tmp + " for writing");
    out.write(buf.data(), (std::streamsize)buf.size());
    out.close();
    if (!out) throw std::runtime_error("write failed for " + tmp);
    std::filesystem::rename(tmp, path);
}

forms::CoefficientTable read_cache(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw CacheError("cannot open cache file " + path);
    std::string buf((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    if (buf.size() < 5 + 16 + 8 || std::memcmp(buf.data(), kMagic, 5) != 0)
        throw CacheError(path + ": bad magic or truncated header");
    const unsigned char* p = (const unsigned char*)buf.data();
    const size_t body_end = buf.size() - 8;
    uint64_t stored = get_u64(p + body_end);
    if (fnv1a(p + 5, body_end - 5) != stored)
        throw CacheError(path + ": checksum mismatch");

    uint32_t weight = get_u32(p + 5);
    uint32_t level = get_u32(p + 9);
    uint64_t n_max = get_u64(p + 13);
    size_t off = 21;
    std::vector<Int> coeffs;
    coeffs.reserve(n_max);
    for (uint64_t n = 1; n <= n_max; ++n) {
        if (off + 5 > body_end) throw CacheError(path + ": truncated at n=" + std::to_string(n));
        unsigned char sign = p[off++];
        uint32_t len = get_u32(p + off);
        off += 4;
        if (off + len > body_end) throw CacheError(path + ": truncated at n=" + std::to_string(n));
        Int a = 0;
        if (len) mpz_import(a.get_mpz_t(), len, 1, 1, 0, 0, p + off);
        off += len;
        if (sign == 2) a = -a;
        else if (sign == 0 && len != 0) throw CacheError(path + ": zero-sign nonzero value");
        else if (sign > 2) throw CacheError(path + ": bad sign byte");
        coeffs.push_back(std::move(a));
    }
    if (off != body_end) throw CacheError(path + ": trailing bytes");
    forms::FormDescriptor form{weight, level, forms::Source::BuiltinEtaEisenstein, ""};
    // labels are not stored in the cache; the caller owns naming
    return forms::CoefficientTable(form, std::move(coeffs));
}

std::string cache_path(const std::string& dir, const std::string& label, unsigned weight,
                       unsigned level) {
    return dir + "/" + label + "-w" + std::to_string(weight) + "-l" + std::to_string(level) +
           ".hord";
}

std::optional<forms::CoefficientTable> load_cached(const std::string& dir,
                                                   const std::string& label, unsigned weight,
                                                   unsigned level, uint64_t n_max) {
    const std::string path = cache_path(dir, label, weight, level);
    std::error_code ec;
    if (!std::filesystem::exists(path, ec)) return std::nullopt;
    std::optional<forms::CoefficientTable> cached;
    try {
        cached = read_cache(path);
    } catch (const CacheError&) {
        std::filesystem::remove(path, ec);  // corrupt: drop, caller rebuilds
        return std::nullopt;
    }
    if (cached->form().weight != weight || cached->form().level != level ||
        cached->n_max() < n_max)
        return std::nullopt;
    std::vector<Int> prefix(cached->raw().begin(), cached->raw().begin() + (ptrdiff_t)n_max);
    forms::FormDescriptor form = cached->form();
    form.label = label;
    return forms::CoefficientTable(form, std::move(prefix));
}

void store_cached(const std::string& dir, const forms::CoefficientTable& table) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    write_cache(table, cache_path(dir, table.form().label, table.form().weight,
                                  table.form().level));
}

}  // namespace hord::io
