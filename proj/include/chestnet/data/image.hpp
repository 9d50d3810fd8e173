#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>

#include <png.h>

#include "chestnet/core/tensor.hpp"

namespace chestnet::data {

// Decoded 8-bit image, rows top to bottom, channels interleaved (1 or 3).
struct ImageU8 {
    std::size_t width = 0, height = 0, channels = 0;
    std::vector<std::uint8_t> pixels;
};

namespace detail {

struct PngReadGuard {
    png_structp png = nullptr;
    png_infop info = nullptr;
    FILE* fp = nullptr;
    ~PngReadGuard() {
        if (png) png_destroy_read_struct(&png, info ? &info : nullptr, nullptr);
        if (fp) std::fclose(fp);
    }
};

struct PngWriteGuard {
    png_structp png = nullptr;
    png_infop info = nullptr;
    FILE* fp = nullptr;
    ~PngWriteGuard() {
        if (png) png_destroy_write_struct(&png, info ? &info : nullptr);
        if (fp) std::fclose(fp);
    }
};

} // namespace detail

// 8-bit grayscale or RGB PNG. Palette, sub-8-bit and 16-bit inputs are
// normalized to 8-bit; alpha is stripped.
inline ImageU8 read_png(const std::filesystem::path& path) {
    detail::PngReadGuard g;
    g.fp = std::fopen(path.string().c_str(), "rb");
    if (!g.fp) throw DataError("cannot open image " + path.string());
    g.png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    if (g.png) g.info = png_create_info_struct(g.png);
    if (!g.png || !g.info) throw DataError("libpng initialization failed");

    ImageU8 img;
    std::vector<png_bytep> rows;

    if (setjmp(png_jmpbuf(g.png)))
        throw DataError("failed to decode PNG " + path.string());

    png_init_io(g.png, g.fp);
    png_read_info(g.png, g.info);

    const png_uint_32 w = png_get_image_width(g.png, g.info);
    const png_uint_32 h = png_get_image_height(g.png, g.info);
    const png_byte color = png_get_color_type(g.png, g.info);
    const png_byte depth = png_get_bit_depth(g.png, g.info);
    if (w == 0 || h == 0) throw DataError("zero-dimension PNG " + path.string());

    if (color == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(g.png);
    if (color == PNG_COLOR_TYPE_GRAY && depth < 8) png_set_expand_gray_1_2_4_to_8(g.png);
    if (depth == 16) png_set_strip_16(g.png);
    if (color & PNG_COLOR_MASK_ALPHA) png_set_strip_alpha(g.png);
    if (png_get_valid(g.png, g.info, PNG_INFO_tRNS)) {
        png_set_tRNS_to_alpha(g.png);
        png_set_strip_alpha(g.png);
    }
    png_read_update_info(g.png, g.info);

    const png_byte out_channels = png_get_channels(g.png, g.info);
    if (out_channels != 1 && out_channels != 3)
        throw DataError("unsupported PNG channel count in " + path.string());

    img.width = w;
    img.height = h;
    img.channels = out_channels;
    img.pixels.resize(static_cast<std::size_t>(w) * h * out_channels);
    rows.resize(h);
    for (png_uint_32 y = 0; y < h; ++y)
        rows[y] = img.pixels.data() + static_cast<std::size_t>(y) * w * out_channels;
    png_read_image(g.png, rows.data());
    png_read_end(g.png, nullptr);
    return img;
}

inline void write_png(const std::filesystem::path& path, const ImageU8& img) {
    if (img.channels != 1 && img.channels != 3)
        throw DataError("write_png: image must have 1 or 3 channels");
    detail::PngWriteGuard g;
    g.fp = std::fopen(path.string().c_str(), "wb");
    if (!g.fp) throw DataError("cannot open " + path.string() + " for writing");
    g.png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    if (g.png) g.info = png_create_info_struct(g.png);
    if (!g.png || !g.info) throw DataError("libpng initialization failed");

    std::vector<png_bytep> rows(img.height);
    for (std::size_t y = 0; y < img.height; ++y)
        rows[y] = const_cast<png_bytep>(img.pixels.data() + y * img.width * img.channels);

    if (setjmp(png_jmpbuf(g.png)))
        throw DataError("failed to encode PNG " + path.string());

    png_init_io(g.png, g.fp);
    png_set_IHDR(g.png, g.info, static_cast<png_uint_32>(img.width),
                 static_cast<png_uint_32>(img.height), 8,
                 img.channels == 1 ? PNG_COLOR_TYPE_GRAY : PNG_COLOR_TYPE_RGB,
                 PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
    png_write_info(g.png, g.info);
    png_write_image(g.png, rows.data());
    png_write_end(g.png, nullptr);
}

// Raw (binary) PGM "P5" and PPM "P6", maxval up to 255.
inline ImageU8 read_pnm(const std::filesystem::path& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw DataError("cannot open image " + path.string());
    std::string magic;
    is >> magic;
    if (magic != "P5" && magic != "P6")
        throw DataError("not a raw PGM/PPM file: " + path.string());

    auto next_int = [&is, &path]() {
        // skip whitespace and '#' comment lines
        int ch = is.get();
        while (ch != EOF && (std::isspace(ch) || ch == '#')) {
            if (ch == '#')
                while (ch != EOF && ch != '\n') ch = is.get();
            ch = is.get();
        }
        std::size_t v = 0;
        bool any = false;
        while (ch != EOF && std::isdigit(ch)) {
            v = v * 10 + static_cast<std::size_t>(ch - '0');
            any = true;
            ch = is.get();
        }
        if (!any) throw DataError("malformed PNM header in " + path.string());
        return v;
    };

    ImageU8 img;
    img.channels = magic == "P5" ? 1 : 3;
    img.width = next_int();
    img.height = next_int();
    const std::size_t maxval = next_int();
    if (img.width == 0 || img.height == 0)
        throw DataError("zero-dimension PNM " + path.string());
    if (maxval == 0 || maxval > 255)
        throw DataError("unsupported PNM maxval " + std::to_string(maxval) + " in " + path.string());

    img.pixels.resize(img.width * img.height * img.channels);
    is.read(reinterpret_cast<char*>(img.pixels.data()),
            static_cast<std::streamsize>(img.pixels.size()));
    if (is.gcount() != static_cast<std::streamsize>(img.pixels.size()))
        throw DataError("truncated PNM payload in " + path.string());
    if (maxval != 255)
        for (auto& p : img.pixels)
            p = static_cast<std::uint8_t>(p * 255 / maxval);
    return img;
}

inline void write_pnm(const std::filesystem::path& path, const ImageU8& img) {
    if (img.channels != 1 && img.channels != 3)
        throw DataError("write_pnm: image must have 1 or 3 channels");
    std::ofstream os(path, std::ios::binary | std::ios::trunc);
    if (!os) throw DataError("cannot open " + path.string() + " for writing");
    os << (img.channels == 1 ? "P5" : "P6") << "\n"
       << img.width << " " << img.height << "\n255\n";
    os.write(reinterpret_cast<const char*>(img.pixels.data()),
             static_cast<std::streamsize>(img.pixels.size()));
}

inline bool sniff_magic(const std::filesystem::path& path, std::string& kind) {
    std::ifstream is(path, std::ios::binary);
    if (!is) return false;
    unsigned char head[8] = {};
    is.read(reinterpret_cast<char*>(head), 8);
    if (is.gcount() >= 8 && head[0] == 0x89 && head[1] == 'P' && head[2] == 'N' &&
        head[3] == 'G' && head[4] == 0x0D && head[5] == 0x0A && head[6] == 0x1A &&
        head[7] == 0x0A) {
        kind = "png";
        return true;
    }
    if (is.gcount() >= 3 && head[0] == 'P' && (head[1] == '5' || head[1] == '6') &&
        std::isspace(head[2])) {
        kind = "pnm";
        return true;
    }
    return false;
}

inline bool looks_like_image(const std::filesystem::path& path) {
    std::string kind;
    return sniff_magic(path, kind);
}

// Decodes by magic bytes, not extension.
inline ImageU8 read_image(const std::filesystem::path& path) {
    std::string kind;
    if (!sniff_magic(path, kind))
        throw DataError("undecodable image " + path.string() +
                        " (expected PNG or raw PGM/PPM)");
    return kind == "png" ? read_png(path) : read_pnm(path);
}

// Planar CxHxW float tensor with the raw 0..255 sample values.
template <typename T = float>
inline TensorT<T> to_planes(const ImageU8& img) {
    TensorT<T> t({img.channels, img.height, img.width});
    for (std::size_t c = 0; c < img.channels; ++c)
        for (std::size_t y = 0; y < img.height; ++y)
            for (std::size_t x = 0; x < img.width; ++x)
                t[(c * img.height + y) * img.width + x] =
                    static_cast<T>(img.pixels[(y * img.width + x) * img.channels + c]);
    return t;
}

enum class Interp { bilinear, nearest };

// Half-pixel-center sampling, edge clamped. Resizing to the source size
// reproduces it exactly.
template <typename T>
TensorT<T> resize_planes(const TensorT<T>& src, std::size_t out_h, std::size_t out_w,
                         Interp interp = Interp::bilinear) {
    if (src.rank() != 3) throw ShapeError("resize expects a CxHxW tensor");
    if (out_h == 0 || out_w == 0) throw ValueError("resize target must be >= 1");
    const std::size_t c = src.dim(0), h = src.dim(1), w = src.dim(2);
    TensorT<T> dst({c, out_h, out_w});
    const double sy = static_cast<double>(h) / static_cast<double>(out_h);
    const double sx = static_cast<double>(w) / static_cast<double>(out_w);
    for (std::size_t ch = 0; ch < c; ++ch) {
        const T* in = src.data() + ch * h * w;
        T* out = dst.data() + ch * out_h * out_w;
        for (std::size_t y = 0; y < out_h; ++y)
            for (std::size_t x = 0; x < out_w; ++x) {
                double fy = (static_cast<double>(y) + 0.5) * sy - 0.5;
                double fx = (static_cast<double>(x) + 0.5) * sx - 0.5;
                if (fy < 0) fy = 0;
                if (fx < 0) fx = 0;
                if (fy > static_cast<double>(h - 1)) fy = static_cast<double>(h - 1);
                if (fx > static_cast<double>(w - 1)) fx = static_cast<double>(w - 1);
                if (interp == Interp::nearest) {
                    const std::size_t iy = static_cast<std::size_t>(fy + 0.5) < h - 1
                                               ? static_cast<std::size_t>(fy + 0.5)
                                               : h - 1;
                    const std::size_t ix = static_cast<std::size_t>(fx + 0.5) < w - 1
                                               ? static_cast<std::size_t>(fx + 0.5)
                                               : w - 1;
                    out[y * out_w + x] = in[iy * w + ix];
                    continue;
                }
                const std::size_t y0 = static_cast<std::size_t>(fy);
                const std::size_t x0 = static_cast<std::size_t>(fx);
                const std::size_t y1 = y0 + 1 < h ? y0 + 1 : h - 1;
                const std::size_t x1 = x0 + 1 < w ? x0 + 1 : w - 1;
                const double wy = fy - static_cast<double>(y0);
                const double wx = fx - static_cast<double>(x0);
                const double v = (1.0 - wy) * ((1.0 - wx) * in[y0 * w + x0] +
                                               wx * in[y0 * w + x1]) +
                                 wy * ((1.0 - wx) * in[y1 * w + x0] + wx * in[y1 * w + x1]);
                out[y * out_w + x] = static_cast<T>(v);
            }
    }
    return dst;
}

namespace detail {
// Rec.601 luma; for gray-stored-as-RGB corpora all three weights see the
// same value, so the result is exact.
template <typename T>
TensorT<T> rgb_to_gray(const TensorT<T>& rgb) {
    const std::size_t h = rgb.dim(1), w = rgb.dim(2);
    TensorT<T> out({1, h, w});
    const T* r = rgb.data();
    const T* g = rgb.data() + h * w;
    const T* b = rgb.data() + 2 * h * w;
    for (std::size_t i = 0; i < h * w; ++i)
        out[i] = static_cast<T>(0.299) * r[i] + static_cast<T>(0.587) * g[i] +
                 static_cast<T>(0.114) * b[i];
    return out;
}

template <typename T>
TensorT<T> gray_to_rgb(const TensorT<T>& gray) {
    const std::size_t h = gray.dim(1), w = gray.dim(2);
    TensorT<T> out({3, h, w});
    for (std::size_t c = 0; c < 3; ++c)
        std::copy(gray.data(), gray.data() + h * w, out.data() + c * h * w);
    return out;
}
} // namespace detail

// decode -> resize -> scale to [0,1] -> adapt channel count to `channels`.
// Deterministic: the same file and target always produce the same tensor.
template <typename T = float>
TensorT<T> load_image(const std::filesystem::path& path, std::size_t channels, std::size_t height,
                      std::size_t width, Interp interp = Interp::bilinear) {
    if (channels != 1 && channels != 3)
        throw ValueError("load_image: target channels must be 1 or 3");
    const ImageU8 raw = read_image(path);
    TensorT<T> t = resize_planes(to_planes<T>(raw), height, width, interp);
    for (std::size_t i = 0; i < t.size(); ++i) t[i] = t[i] / static_cast<T>(255);
    if (t.dim(0) == channels) return t;
    return channels == 1 ? detail::rgb_to_gray(t) : detail::gray_to_rgb(t);
}

} // namespace chestnet::data
