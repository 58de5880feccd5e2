#include "dtrl/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>
#include <vector>

#include "dtrl/errors.hpp"
#include "dtrl/rng.hpp"

static_assert(std::endian::native == std::endian::little,
              "checkpoint payload is little-endian float32");

namespace dtrl::nn {

void save_checkpoint(const std::string& path, const ParamStore<float>& params) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw IoError("cannot open checkpoint for writing: " + path);
    }
    out << "DTRL-CKPT 1\n";
    out << "count " << params.names().size() << "\n";
    std::size_t offset = 0;
    for (const auto& name : params.names()) {
        const auto& value = params.at(name).value;
        out << name << " " << value.rows << " " << value.cols << " " << offset << "\n";
        offset += value.data.size() * sizeof(float);
    }
    out << "data " << offset << "\n";
    for (const auto& name : params.names()) {
        const auto& value = params.at(name).value;
        out.write(reinterpret_cast<const char*>(value.data.data()),
                  static_cast<std::streamsize>(value.data.size() * sizeof(float)));
    }
    if (!out) {
        throw IoError("short write while saving checkpoint: " + path);
    }
}

void load_checkpoint(const std::string& path, ParamStore<float>& params) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw IoError("cannot open checkpoint: " + path);
    }
    std::string line;
    if (!std::getline(in, line) || line != "DTRL-CKPT 1") {
        throw ValidationError("not a DTRL checkpoint: " + path);
    }
    if (!std::getline(in, line)) {
        throw ValidationError("truncated checkpoint header: " + path);
    }
    std::size_t count = 0;
    {
        std::istringstream ls(line);
        std::string tag;
        if (!(ls >> tag >> count) || tag != "count") {
            throw ValidationError("bad checkpoint count line: " + path);
        }
    }
    struct Entry {
        std::string name;
        std::size_t rows, cols, offset;
    };
    std::vector<Entry> entries(count);
    for (auto& e : entries) {
        if (!std::getline(in, line)) {
            throw ValidationError("truncated checkpoint manifest: " + path);
        }
        std::istringstream ls(line);
        if (!(ls >> e.name >> e.rows >> e.cols >> e.offset)) {
            throw ValidationError("bad checkpoint manifest line: " + line);
        }
    }
    if (!std::getline(in, line)) {
        throw ValidationError("missing checkpoint data line: " + path);
    }
    std::size_t payload_bytes = 0;
    {
        std::istringstream ls(line);
        std::string tag;
        if (!(ls >> tag >> payload_bytes) || tag != "data") {
            throw ValidationError("bad checkpoint data line: " + path);
        }
    }
    std::vector<char> payload(payload_bytes);
    in.read(payload.data(), static_cast<std::streamsize>(payload_bytes));
    if (static_cast<std::size_t>(in.gcount()) != payload_bytes) {
        throw ValidationError("checkpoint payload is truncated: " + path);
    }

    if (count != params.names().size()) {
        throw ValidationError("checkpoint has " + std::to_string(count) + " entries, model has " +
                              std::to_string(params.names().size()));
    }
    for (const auto& e : entries) {
        if (!params.contains(e.name)) {
            throw ValidationError("checkpoint entry not in model: " + e.name);
        }
        auto& p = params.at(e.name);
        if (p.value.rows != e.rows || p.value.cols != e.cols) {
            throw ValidationError("checkpoint shape mismatch for " + e.name + ": file " +
                                  std::to_string(e.rows) + "x" + std::to_string(e.cols) +
                                  ", model " + std::to_string(p.value.rows) + "x" +
                                  std::to_string(p.value.cols));
        }
        const std::size_t bytes = e.rows * e.cols * sizeof(float);
        if (e.offset + bytes > payload_bytes) {
            throw ValidationError("checkpoint offset out of range for " + e.name);
        }
        std::memcpy(p.value.data.data(), payload.data() + e.offset, bytes);
    }
}

std::uint64_t file_content_hash(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw IoError("cannot open file for hashing: " + path);
    }
    std::uint64_t h = 1469598103934665603ull;
    char buf[4096];
    while (in.read(buf, sizeof(buf)) || in.gcount() > 0) {
        const std::streamsize n = in.gcount();
        for (std::streamsize i = 0; i < n; ++i) {
            h ^= static_cast<unsigned char>(buf[i]);
            h *= 1099511628211ull;
        }
        if (!in) {
            break;
        }
    }
    return h;
}

}  // namespace dtrl::nn
