#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>

#include <json.hpp>

#include "mcprop/error.hpp"
#include "mcprop/raster.hpp"

namespace mcprop {

// ------------------------------------------------------------------
// Atomic file writes: write <path>.tmp in the same directory, then rename.

inline void write_file_atomic(const std::filesystem::path& path,
                              const std::string& bytes) {
    const std::filesystem::path tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw IoError("cannot open for writing: " + tmp.string());
        out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
        if (!out) throw IoError("write failed: " + tmp.string());
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) throw IoError("rename failed for " + path.string() + ": " + ec.message());
}

inline std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open: " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    if (in.bad()) throw IoError("read failed: " + path.string());
    return std::move(buf).str();
}

namespace detail {

// Strict ASCII unsigned integer parse for file headers: nonempty, digits
// only, no leading zeros (except "0" itself).
inline bool parse_header_int(const std::string& tok, int& out) {
    if (tok.empty() || tok.size() > 9) return false;
    if (tok.size() > 1 && tok[0] == '0') return false;
    long long v = 0;
    for (char c : tok) {
        if (c < '0' || c > '9') return false;
        v = v * 10 + (c - '0');
    }
    out = static_cast<int>(v);
    return true;
}

inline std::string take_until(const std::string& s, std::size_t& pos, char delim,
                              const char* what) {
    const std::size_t next = s.find(delim, pos);
    if (next == std::string::npos)
        throw FormatError(std::string("missing delimiter after ") + what);
    std::string tok = s.substr(pos, next - pos);
    pos = next + 1;
    return tok;
}

} // namespace detail

// ------------------------------------------------------------------
// PGM (binary P5, maxval 255). The writer emits the canonical header
// "P5\n<w> <h>\n255\n"; the reader accepts exactly that form so that
// write(read(f)) is byte-identical for every file read() accepts.

inline SlideRaster read_pgm_bytes(const std::string& bytes,
                                  double resolution_um_per_px = 0.25) {
    std::size_t pos = 0;
    if (bytes.rfind("P5\n", 0) != 0)
        throw FormatError("PGM magic: expected \"P5\"");
    pos = 3;
    const std::string w_tok = detail::take_until(bytes, pos, ' ', "PGM width");
    const std::string h_tok = detail::take_until(bytes, pos, '\n', "PGM height");
    const std::string max_tok = detail::take_until(bytes, pos, '\n', "PGM maxval");
    int w = 0, h = 0, maxval = 0;
    if (!detail::parse_header_int(w_tok, w) || w < 1)
        throw FormatError("PGM width: invalid value \"" + w_tok + "\"");
    if (!detail::parse_header_int(h_tok, h) || h < 1)
        throw FormatError("PGM height: invalid value \"" + h_tok + "\"");
    if (!detail::parse_header_int(max_tok, maxval) || maxval != 255)
        throw FormatError("PGM maxval: must be 255, got \"" + max_tok + "\"");

    const std::size_t expected = static_cast<std::size_t>(w) * h;
    const std::size_t have = bytes.size() - pos;
    if (have < expected)
        throw FormatError("PGM payload truncated: expected " +
                          std::to_string(expected) + " bytes, got " +
                          std::to_string(have));
    if (have > expected)
        throw FormatError("PGM payload has trailing bytes");

    SlideRaster r;
    r.width_px = w;
    r.height_px = h;
    r.channels = 1;
    r.resolution_um_per_px = resolution_um_per_px;
    r.pixels.assign(bytes.begin() + static_cast<std::ptrdiff_t>(pos), bytes.end());
    return r;
}

inline SlideRaster read_pgm(const std::filesystem::path& path,
                            double resolution_um_per_px = 0.25) {
    return read_pgm_bytes(read_file(path), resolution_um_per_px);
}

inline std::string write_pgm_bytes(const SlideRaster& raster) {
    raster.validate();
    if (raster.channels != 1)
        throw DomainError("write_pgm: only grayscale rasters are supported");
    std::string out = "P5\n" + std::to_string(raster.width_px) + " " +
                      std::to_string(raster.height_px) + "\n255\n";
    out.append(raster.pixels.begin(), raster.pixels.end());
    return out;
}

inline void write_pgm(const SlideRaster& raster, const std::filesystem::path& path) {
    write_file_atomic(path, write_pgm_bytes(raster));
}

// Masks travel as PGM with {0,255} <-> {0,1}.
inline SlideRaster raster_from_mask(const BinaryMask& mask,
                                    double resolution_um_per_px = 0.25) {
    mask.validate();
    SlideRaster r = SlideRaster::gray(mask.width_px, mask.height_px, 0,
                                      resolution_um_per_px);
    for (std::size_t i = 0; i < mask.bits.size(); ++i)
        r.pixels[i] = mask.bits[i] ? 255 : 0;
    return r;
}

inline BinaryMask mask_from_raster(const SlideRaster& raster, int scale = 1) {
    raster.validate();
    if (raster.channels != 1)
        throw FormatError("mask raster must be grayscale");
    BinaryMask m = BinaryMask::zeros(raster.width_px, raster.height_px, scale);
    for (std::size_t i = 0; i < raster.pixels.size(); ++i) {
        const std::uint8_t v = raster.pixels[i];
        if (v != 0 && v != 255)
            throw FormatError("mask raster pixel " + std::to_string(i) +
                              " is neither 0 nor 255");
        m.bits[i] = v ? 1 : 0;
    }
    return m;
}

// ------------------------------------------------------------------
// FRAS: float raster container.
//   "FRAS\n<w> <h> <scale>\n" + w*h little-endian IEEE-754 binary32, row-major.
// Round trips preserve every accepted bit pattern.

inline DensityMap read_fras_bytes(const std::string& bytes) {
    std::size_t pos = 0;
    if (bytes.rfind("FRAS\n", 0) != 0)
        throw FormatError("FRAS magic: expected \"FRAS\"");
    pos = 5;
    const std::string w_tok = detail::take_until(bytes, pos, ' ', "FRAS width");
    const std::string h_tok = detail::take_until(bytes, pos, ' ', "FRAS height");
    const std::string s_tok = detail::take_until(bytes, pos, '\n', "FRAS scale");
    int w = 0, h = 0, scale = 0;
    if (!detail::parse_header_int(w_tok, w) || w < 1)
        throw FormatError("FRAS width: invalid value \"" + w_tok + "\"");
    if (!detail::parse_header_int(h_tok, h) || h < 1)
        throw FormatError("FRAS height: invalid value \"" + h_tok + "\"");
    if (!detail::parse_header_int(s_tok, scale) || scale < 1)
        throw FormatError("FRAS scale: invalid value \"" + s_tok + "\"");

    const std::size_t count = static_cast<std::size_t>(w) * h;
    const std::size_t have = bytes.size() - pos;
    if (have < count * 4)
        throw FormatError("FRAS payload truncated: expected " +
                          std::to_string(count * 4) + " bytes, got " +
                          std::to_string(have));
    if (have > count * 4)
        throw FormatError("FRAS payload has trailing bytes");

    DensityMap m;
    m.width_px = w;
    m.height_px = h;
    m.scale = scale;
    m.values.resize(count);
    for (std::size_t i = 0; i < count; ++i) {
        const auto* p =
            reinterpret_cast<const std::uint8_t*>(bytes.data() + pos + i * 4);
        const std::uint32_t u = static_cast<std::uint32_t>(p[0]) |
                                (static_cast<std::uint32_t>(p[1]) << 8) |
                                (static_cast<std::uint32_t>(p[2]) << 16) |
                                (static_cast<std::uint32_t>(p[3]) << 24);
        const float v = std::bit_cast<float>(u);
        if (!std::isfinite(v) || v < 0.0f)
            throw FormatError("FRAS value " + std::to_string(i) +
                              " is not finite and non-negative");
        m.values[i] = v;
    }
    return m;
}

inline DensityMap read_fras(const std::filesystem::path& path) {
    return read_fras_bytes(read_file(path));
}

inline std::string write_fras_bytes(const DensityMap& map) {
    map.validate();
    std::string out = "FRAS\n" + std::to_string(map.width_px) + " " +
                      std::to_string(map.height_px) + " " +
                      std::to_string(map.scale) + "\n";
    out.reserve(out.size() + map.values.size() * 4);
    for (float v : map.values) {
        const std::uint32_t u = std::bit_cast<std::uint32_t>(v);
        out.push_back(static_cast<char>(u & 0xFF));
        out.push_back(static_cast<char>((u >> 8) & 0xFF));
        out.push_back(static_cast<char>((u >> 16) & 0xFF));
        out.push_back(static_cast<char>((u >> 24) & 0xFF));
    }
    return out;
}

inline void write_fras(const DensityMap& map, const std::filesystem::path& path) {
    write_file_atomic(path, write_fras_bytes(map));
}

// ------------------------------------------------------------------
// Sidecar metadata: "<stem>.meta.json", a flat JSON object. Rasters carry
// resolution_um_per_px and scale; annotation CSVs carry width_px/height_px.

struct Meta {
    std::optional<double> resolution_um_per_px;
    std::optional<int> scale;
    std::optional<int> width_px;
    std::optional<int> height_px;
};

inline std::filesystem::path sidecar_path(const std::filesystem::path& path) {
    std::filesystem::path p = path;
    p.replace_extension(".meta.json");
    return p;
}

inline Meta read_meta_text(const std::string& text, const std::string& label) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(label + ": invalid JSON: " + e.what());
    }
    if (!j.is_object()) throw FormatError(label + ": metadata must be a JSON object");
    Meta m;
    for (const auto& [key, value] : j.items()) {
        if (key == "resolution_um_per_px") {
            if (!value.is_number() || !(value.get<double>() > 0.0))
                throw FormatError(label + ": resolution_um_per_px must be a positive number");
            m.resolution_um_per_px = value.get<double>();
        } else if (key == "scale") {
            if (!value.is_number_integer() || value.get<int>() < 1)
                throw FormatError(label + ": scale must be a positive integer");
            m.scale = value.get<int>();
        } else if (key == "width_px") {
            if (!value.is_number_integer() || value.get<int>() < 1)
                throw FormatError(label + ": width_px must be a positive integer");
            m.width_px = value.get<int>();
        } else if (key == "height_px") {
            if (!value.is_number_integer() || value.get<int>() < 1)
                throw FormatError(label + ": height_px must be a positive integer");
            m.height_px = value.get<int>();
        } else {
            throw FormatError(label + ": unknown metadata key \"" + key + "\"");
        }
    }
    return m;
}

inline Meta read_meta(const std::filesystem::path& path) {
    return read_meta_text(read_file(path), path.string());
}

inline std::string write_meta_text(const Meta& meta) {
    nlohmann::ordered_json j = nlohmann::ordered_json::object();
    if (meta.resolution_um_per_px) j["resolution_um_per_px"] = *meta.resolution_um_per_px;
    if (meta.scale) j["scale"] = *meta.scale;
    if (meta.width_px) j["width_px"] = *meta.width_px;
    if (meta.height_px) j["height_px"] = *meta.height_px;
    return j.dump() + "\n";
}

inline void write_meta(const Meta& meta, const std::filesystem::path& path) {
    write_file_atomic(path, write_meta_text(meta));
}

} // namespace mcprop
