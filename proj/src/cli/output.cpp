// SPDX-License-Identifier: Apache-2.0
#include "fadechan/cli/output.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <system_error>
#include <unistd.h>

#include "fadechan/error.hpp"

namespace fadechan {
namespace {

void quote(std::string& out, const std::string& s) {
    // nlohmann's dump handles escaping of a lone string.
    out += Json(s).dump();
}

void emit(std::string& out, const Json& v, int depth) {
    const std::string pad(2 * static_cast<std::size_t>(depth + 1), ' ');
    const std::string close(2 * static_cast<std::size_t>(depth), ' ');
    switch (v.type()) {
        case Json::value_t::object: {
            if (v.empty()) {
                out += "{}";
                return;
            }
            out += "{\n";
            bool first = true;
            for (auto it = v.begin(); it != v.end(); ++it) {  // std::map keeps keys sorted
                if (!first) out += ",\n";
                first = false;
                out += pad;
                quote(out, it.key());
                out += ": ";
                emit(out, it.value(), depth + 1);
            }
            out += "\n" + close + "}";
            return;
        }
        case Json::value_t::array: {
            if (v.empty()) {
                out += "[]";
                return;
            }
            out += "[\n";
            for (std::size_t i = 0; i < v.size(); ++i) {
                if (i) out += ",\n";
                out += pad;
                emit(out, v[i], depth + 1);
            }
            out += "\n" + close + "]";
            return;
        }
        case Json::value_t::number_float: out += format_number(v.get<double>()); return;
        default: out += v.dump(); return;
    }
}

}  // namespace

std::string format_number(double value) {
    if (!std::isfinite(value)) return "null";
    if (value == 0.0) return "0";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.12g", value);
    return buf;
}

std::string canonical_json(const Json& value) {
    std::string out;
    emit(out, value, 0);
    out += "\n";
    return out;
}

std::string distribution_csv(const TransmittanceDistribution& dist) {
    std::string out = "eta_bin_left,eta_bin_right,density\n";
    for (std::size_t i = 0; i < dist.bins(); ++i) {
        out += format_number(dist.bin_edges[i]);
        out += ',';
        out += format_number(dist.bin_edges[i + 1]);
        out += ',';
        out += format_number(dist.density[i]);
        out += '\n';
    }
    return out;
}

void write_atomic(const std::filesystem::path& path, std::string_view content) {
    auto tmp = path;
    tmp += ".tmp." + std::to_string(::getpid());
    {
        std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
        if (!f) throw Error("cannot open " + tmp.string() + " for writing");
        f.write(content.data(), static_cast<std::streamsize>(content.size()));
        f.flush();
        if (!f) throw Error("write failed for " + tmp.string());
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) {
        std::filesystem::remove(tmp);
        throw Error("cannot rename " + tmp.string() + " to " + path.string() + ": " + ec.message());
    }
}

std::string fnv1a_hex(std::string_view bytes) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

}  // namespace fadechan
