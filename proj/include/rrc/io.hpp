#pragma once

#include <png.h>

#include <cctype>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <memory>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "rrc/image.hpp"

namespace rrc {

namespace detail {

inline bool has_suffix(const std::string& s, const std::string& suf) {
    if (s.size() < suf.size()) return false;
    for (std::size_t i = 0; i < suf.size(); ++i)
        if (std::tolower(static_cast<unsigned char>(s[s.size() - suf.size() + i])) != suf[i])
            return false;
    return true;
}

inline int pnm_token(std::istream& in, const std::string& path) {
    // Skips whitespace and '#' comment lines between header fields.
    for (;;) {
        const int ch = in.peek();
        if (ch == EOF) throw std::runtime_error(path + ": truncated PGM header");
        if (std::isspace(ch)) {
            in.get();
            continue;
        }
        if (ch == '#') {
            std::string line;
            std::getline(in, line);
            continue;
        }
        break;
    }
    int value = 0;
    if (!(in >> value)) throw std::runtime_error(path + ": malformed PGM header field");
    return value;
}

inline ImageBuffer load_pgm(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error(path + ": cannot open");
    char magic[2] = {0, 0};
    in.read(magic, 2);
    if (magic[0] != 'P' || magic[1] != '5')
        throw std::runtime_error(path + ": not a binary (P5) PGM file");
    const int cols = pnm_token(in, path);
    const int rows = pnm_token(in, path);
    const int maxval = pnm_token(in, path);
    if (rows < 1 || cols < 1) throw std::runtime_error(path + ": bad PGM dimensions");
    if (maxval != 255)
        throw std::runtime_error(path + ": unsupported PGM maxval " + std::to_string(maxval) +
                                 " (only 255 is accepted)");
    in.get();  // single whitespace after maxval
    std::vector<unsigned char> raw(static_cast<std::size_t>(rows) * cols);
    in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
    if (static_cast<std::size_t>(in.gcount()) != raw.size())
        throw std::runtime_error(path + ": truncated PGM pixel data");
    ImageBuffer img(rows, cols);
    for (std::size_t i = 0; i < raw.size(); ++i) img.data[i] = static_cast<double>(raw[i]);
    return img;
}

inline void save_pgm(const ImageBuffer& img, const std::string& path) {
    const ImageBuffer q = quantize_to_byte(img);
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error(path + ": cannot open for writing");
    out << "P5\n" << img.cols << " " << img.rows << "\n255\n";
    std::vector<unsigned char> raw(q.data.size());
    for (std::size_t i = 0; i < raw.size(); ++i) raw[i] = static_cast<unsigned char>(q.data[i]);
    out.write(reinterpret_cast<const char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
    if (!out) throw std::runtime_error(path + ": write failed");
}

struct PngReadCloser {
    png_structp p = nullptr;
    png_infop i = nullptr;
    std::FILE* f = nullptr;
    ~PngReadCloser() {
        if (p) png_destroy_read_struct(&p, i ? &i : nullptr, nullptr);
        if (f) std::fclose(f);
    }
};

inline ImageBuffer load_png(const std::string& path) {
    PngReadCloser ctx;
    ctx.f = std::fopen(path.c_str(), "rb");
    if (!ctx.f) throw std::runtime_error(path + ": cannot open");
    unsigned char sig[8];
    if (std::fread(sig, 1, 8, ctx.f) != 8 || png_sig_cmp(sig, 0, 8))
        throw std::runtime_error(path + ": not a PNG file");
    ctx.p = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    ctx.i = png_create_info_struct(ctx.p);
    if (!ctx.p || !ctx.i) throw std::runtime_error(path + ": libpng init failed");
    if (setjmp(png_jmpbuf(ctx.p))) throw std::runtime_error(path + ": PNG decode error");
    png_init_io(ctx.p, ctx.f);
    png_set_sig_bytes(ctx.p, 8);
    png_read_info(ctx.p, ctx.i);

    const png_uint_32 w = png_get_image_width(ctx.p, ctx.i);
    const png_uint_32 h = png_get_image_height(ctx.p, ctx.i);
    const int depth = png_get_bit_depth(ctx.p, ctx.i);
    const int color = png_get_color_type(ctx.p, ctx.i);
    if (color != PNG_COLOR_TYPE_GRAY)
        throw std::runtime_error(path + ": PNG is not grayscale (color type " +
                                 std::to_string(color) + ")");
    if (depth != 8) {
        if (depth < 8)
            png_set_expand_gray_1_2_4_to_8(ctx.p);
        else
            throw std::runtime_error(path + ": unsupported PNG bit depth " + std::to_string(depth));
    }
    png_read_update_info(ctx.p, ctx.i);

    ImageBuffer img(static_cast<int>(h), static_cast<int>(w));
    std::vector<unsigned char> row(w);
    for (png_uint_32 r = 0; r < h; ++r) {
        png_read_row(ctx.p, row.data(), nullptr);
        for (png_uint_32 c = 0; c < w; ++c) img.at(static_cast<int>(r), static_cast<int>(c)) = row[c];
    }
    png_read_end(ctx.p, nullptr);
    return img;
}

struct PngWriteCloser {
    png_structp p = nullptr;
    png_infop i = nullptr;
    std::FILE* f = nullptr;
    ~PngWriteCloser() {
        if (p) png_destroy_write_struct(&p, i ? &i : nullptr);
        if (f) std::fclose(f);
    }
};

inline void save_png(const ImageBuffer& img, const std::string& path) {
    const ImageBuffer q = quantize_to_byte(img);
    PngWriteCloser ctx;
    ctx.f = std::fopen(path.c_str(), "wb");
    if (!ctx.f) throw std::runtime_error(path + ": cannot open for writing");
    ctx.p = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    ctx.i = png_create_info_struct(ctx.p);
    if (!ctx.p || !ctx.i) throw std::runtime_error(path + ": libpng init failed");
    if (setjmp(png_jmpbuf(ctx.p))) throw std::runtime_error(path + ": PNG encode error");
    png_init_io(ctx.p, ctx.f);
    png_set_IHDR(ctx.p, ctx.i, img.cols, img.rows, 8, PNG_COLOR_TYPE_GRAY, PNG_INTERLACE_NONE,
                 PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
    png_write_info(ctx.p, ctx.i);
    std::vector<unsigned char> row(img.cols);
    for (int r = 0; r < img.rows; ++r) {
        for (int c = 0; c < img.cols; ++c) row[c] = static_cast<unsigned char>(q.at(r, c));
        png_write_row(ctx.p, row.data());
    }
    png_write_end(ctx.p, nullptr);
}

}  // namespace detail

/// Loads an 8-bit grayscale PGM (binary P5) or grayscale PNG.
inline ImageBuffer load_image(const std::string& path) {
    if (detail::has_suffix(path, ".pgm")) return detail::load_pgm(path);
    if (detail::has_suffix(path, ".png")) return detail::load_png(path);
    throw std::runtime_error(path + ": unsupported image format (use .pgm or .png)");
}

/// Saves rounded-and-clamped 8-bit grayscale, format chosen by extension.
inline void save_image(const ImageBuffer& img, const std::string& path) {
    if (img.rows < 1 || img.cols < 1) throw std::invalid_argument("save_image: empty image");
    if (detail::has_suffix(path, ".pgm")) return detail::save_pgm(img, path);
    if (detail::has_suffix(path, ".png")) return detail::save_png(img, path);
    throw std::runtime_error(path + ": unsupported image format (use .pgm or .png)");
}

}  // namespace rrc
