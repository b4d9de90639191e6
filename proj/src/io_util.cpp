#include "tassel/io_util.hpp"

#include <zlib.h>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <mutex>
#include <sstream>

#include "tassel/error.hpp"

namespace tassel {

namespace {

bool is_gzip(const std::filesystem::path& path) { return path.extension() == ".gz"; }

std::mutex& sink_mutex() {
    static std::mutex mu;
    return mu;
}

WarningSink& sink_slot() {
    static WarningSink sink = [](const std::string& m) { std::cerr << "warning: " << m << '\n'; };
    return sink;
}

}  // namespace

struct LineReader::Impl {
    std::ifstream plain;
    gzFile gz = nullptr;
    std::string pending;
    bool eof = false;
};

LineReader::LineReader(const std::filesystem::path& path) : impl_(std::make_unique<Impl>()) {
    if (!std::filesystem::exists(path)) throw SchemaError("file not found: " + path.string());
    if (is_gzip(path)) {
        impl_->gz = gzopen(path.c_str(), "rb");
        if (!impl_->gz) throw SchemaError("cannot open gzip file " + path.string());
    } else {
        impl_->plain.open(path, std::ios::binary);
        if (!impl_->plain) throw SchemaError("cannot open " + path.string());
    }
}

LineReader::~LineReader() {
    if (impl_ && impl_->gz) gzclose(impl_->gz);
}

bool LineReader::next(std::string& line) {
    if (!impl_->gz) {
        if (!std::getline(impl_->plain, line)) return false;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        return true;
    }
    line.clear();
    char buf[65536];
    bool got = false;
    while (gzgets(impl_->gz, buf, sizeof buf)) {
        got = true;
        line += buf;
        if (!line.empty() && line.back() == '\n') {
            line.pop_back();
            break;
        }
    }
    if (!got) return false;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    return true;
}

void write_file(const std::filesystem::path& path, std::string_view text) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    if (is_gzip(path)) {
        // zlib writes a fixed gzip header (no name, zero mtime), so output is reproducible.
        gzFile gz = gzopen(path.c_str(), "wb6");
        if (!gz) throw SchemaError("cannot write " + path.string());
        if (!text.empty() && gzwrite(gz, text.data(), static_cast<unsigned>(text.size())) == 0) {
            gzclose(gz);
            throw SchemaError("gzip write failed for " + path.string());
        }
        gzclose(gz);
        return;
    }
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw SchemaError("cannot write " + path.string());
    out.write(text.data(), static_cast<std::streamsize>(text.size()));
    if (!out) throw SchemaError("write failed for " + path.string());
}

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw SchemaError("cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::uint64_t fnv1a64(std::string_view bytes) {
    std::uint64_t h = 0xCBF29CE484222325ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001B3ULL;
    }
    return h;
}

std::string hex64(std::uint64_t v) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

std::string file_digest(const std::filesystem::path& path) { return hex64(fnv1a64(read_file(path))); }

WarningSink set_warning_sink(WarningSink sink) {
    std::lock_guard lock(sink_mutex());
    auto previous = std::move(sink_slot());
    sink_slot() = std::move(sink);
    return previous;
}

void warn(const std::string& message) {
    std::lock_guard lock(sink_mutex());
    if (sink_slot()) sink_slot()(message);
}

}  // namespace tassel
