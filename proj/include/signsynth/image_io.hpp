#pragma once

// PNG and JPEG codecs on top of libpng and libjpeg.
//
// PNG output is byte-stable: compression level 3, SUB filter on every row,
// no ancillary chunks at all. Fully opaque images are written as 8-bit RGB,
// everything else as 8-bit RGBA.

#include <csetjmp>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <string>
#include <vector>

#include <jpeglib.h>
#include <png.h>

#include "signsynth/error.hpp"
#include "signsynth/raster.hpp"

namespace signsynth {

using Bytes = std::vector<std::uint8_t>;

inline Bytes read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    Bytes data((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return data;
}

inline void write_file(const std::filesystem::path& path, const void* data, std::size_t size) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot create " + path.string());
    out.write(static_cast<const char*>(data), static_cast<std::streamsize>(size));
    if (!out) throw IoError("write failed for " + path.string());
}

inline void write_file(const std::filesystem::path& path, const std::string& text) {
    write_file(path, text.data(), text.size());
}

namespace detail {

struct PngWriteState {
    Bytes out;
    char message[256] = {};
};

inline void png_write_callback(png_structp png, png_bytep data, png_size_t len) {
    auto* st = static_cast<PngWriteState*>(png_get_io_ptr(png));
    st->out.insert(st->out.end(), data, data + len);
}

inline void png_flush_callback(png_structp) {}

inline void png_error_callback(png_structp png, png_const_charp msg) {
    auto* st = static_cast<PngWriteState*>(png_get_error_ptr(png));
    std::snprintf(st->message, sizeof st->message, "%s", msg);
    png_longjmp(png, 1);
}

inline void png_warning_callback(png_structp, png_const_charp) {}

// Kept free of objects with destructors between setjmp and the last
// libpng call so that longjmp unwinding stays well defined.
inline bool png_encode_rows(PngWriteState& st, png_bytepp rows, int w, int h, int color_type) {
    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, &st, png_error_callback,
                                              png_warning_callback);
    if (!png) return false;
    png_infop info = png_create_info_struct(png);
    if (!info) {
        png_destroy_write_struct(&png, nullptr);
        return false;
    }
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_write_struct(&png, &info);
        return false;
    }
    png_set_write_fn(png, &st, png_write_callback, png_flush_callback);
    png_set_compression_level(png, 3);
    png_set_filter(png, PNG_FILTER_TYPE_BASE, PNG_FILTER_SUB);
    png_set_IHDR(png, info, static_cast<png_uint_32>(w), static_cast<png_uint_32>(h), 8,
                 color_type, PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
                 PNG_FILTER_TYPE_DEFAULT);
    png_write_info(png, info);
    png_write_image(png, rows);
    png_write_end(png, nullptr);
    png_destroy_write_struct(&png, &info);
    return true;
}

struct JpegErrorManager {
    jpeg_error_mgr base;
    std::jmp_buf jump;
    char message[JMSG_LENGTH_MAX];
};

inline void jpeg_error_exit(j_common_ptr cinfo) {
    auto* err = reinterpret_cast<JpegErrorManager*>(cinfo->err);
    (*cinfo->err->format_message)(cinfo, err->message);
    std::longjmp(err->jump, 1);
}

inline void jpeg_silent(j_common_ptr, int) {}

}  // namespace detail

inline Bytes encode_png(const RasterImage& img) {
    const bool opaque = img.fully_opaque();
    const int channels = opaque ? 3 : 4;
    Bytes packed;
    if (opaque) {
        const auto px = img.pixels();
        packed.resize(static_cast<std::size_t>(img.width()) * img.height() * 3);
        for (std::size_t i = 0, j = 0; i < px.size(); i += 4, j += 3) {
            packed[j] = px[i];
            packed[j + 1] = px[i + 1];
            packed[j + 2] = px[i + 2];
        }
    } else {
        packed.assign(img.pixels().begin(), img.pixels().end());
    }
    std::vector<png_bytep> rows(static_cast<std::size_t>(img.height()));
    const std::size_t stride = static_cast<std::size_t>(img.width()) * channels;
    for (int y = 0; y < img.height(); ++y) rows[y] = packed.data() + stride * y;

    detail::PngWriteState st;
    if (!detail::png_encode_rows(st, rows.data(), img.width(), img.height(),
                                 opaque ? PNG_COLOR_TYPE_RGB : PNG_COLOR_TYPE_RGBA))
        throw IoError(std::string("PNG encode failed: ") + st.message);
    return std::move(st.out);
}

inline RasterImage decode_png(const Bytes& data) {
    png_image image;
    std::memset(&image, 0, sizeof image);
    image.version = PNG_IMAGE_VERSION;
    if (!png_image_begin_read_from_memory(&image, data.data(), data.size()))
        throw IoError(std::string("PNG decode failed: ") + image.message);
    image.format = PNG_FORMAT_RGBA;
    if (image.width < 1 || image.height < 1 || image.width > kMaxDimension ||
        image.height > kMaxDimension) {
        png_image_free(&image);
        throw IoError("PNG dimensions out of range");
    }
    std::vector<std::uint8_t> px(PNG_IMAGE_SIZE(image));
    if (!png_image_finish_read(&image, nullptr, px.data(), 0, nullptr))
        throw IoError(std::string("PNG decode failed: ") + image.message);
    return RasterImage(static_cast<int>(image.width), static_cast<int>(image.height), std::move(px));
}

namespace detail {

struct JpegEncodeState {
    JpegErrorManager err;
    unsigned char* buffer = nullptr;
    unsigned long size = 0;
};

inline bool jpeg_encode_rgb(JpegEncodeState& st, const std::uint8_t* rgb, int w, int h,
                            int quality) {
    jpeg_compress_struct cinfo;
    cinfo.err = jpeg_std_error(&st.err.base);
    st.err.base.error_exit = jpeg_error_exit;
    st.err.base.emit_message = jpeg_silent;
    if (setjmp(st.err.jump)) {
        jpeg_destroy_compress(&cinfo);
        return false;
    }
    jpeg_create_compress(&cinfo);
    jpeg_mem_dest(&cinfo, &st.buffer, &st.size);
    cinfo.image_width = static_cast<JDIMENSION>(w);
    cinfo.image_height = static_cast<JDIMENSION>(h);
    cinfo.input_components = 3;
    cinfo.in_color_space = JCS_RGB;
    jpeg_set_defaults(&cinfo);
    jpeg_set_quality(&cinfo, quality, TRUE);
    cinfo.comp_info[0].h_samp_factor = 2;
    cinfo.comp_info[0].v_samp_factor = 2;
    cinfo.comp_info[1].h_samp_factor = 1;
    cinfo.comp_info[1].v_samp_factor = 1;
    cinfo.comp_info[2].h_samp_factor = 1;
    cinfo.comp_info[2].v_samp_factor = 1;
    cinfo.dct_method = JDCT_ISLOW;
    jpeg_start_compress(&cinfo, TRUE);
    while (cinfo.next_scanline < cinfo.image_height) {
        JSAMPROW row = const_cast<std::uint8_t*>(rgb) +
                       static_cast<std::size_t>(w) * 3 * cinfo.next_scanline;
        jpeg_write_scanlines(&cinfo, &row, 1);
    }
    jpeg_finish_compress(&cinfo);
    jpeg_destroy_compress(&cinfo);
    return true;
}

struct JpegDecodeState {
    JpegErrorManager err;
    std::vector<std::uint8_t> rgb;
    int width = 0;
    int height = 0;
};

inline bool jpeg_decode_rgb(JpegDecodeState& st, const Bytes& data) {
    jpeg_decompress_struct cinfo;
    cinfo.err = jpeg_std_error(&st.err.base);
    st.err.base.error_exit = jpeg_error_exit;
    st.err.base.emit_message = jpeg_silent;
    if (setjmp(st.err.jump)) {
        jpeg_destroy_decompress(&cinfo);
        return false;
    }
    jpeg_create_decompress(&cinfo);
    jpeg_mem_src(&cinfo, data.data(), static_cast<unsigned long>(data.size()));
    jpeg_read_header(&cinfo, TRUE);
    cinfo.out_color_space = JCS_RGB;
    cinfo.dct_method = JDCT_ISLOW;
    jpeg_start_decompress(&cinfo);
    st.width = static_cast<int>(cinfo.output_width);
    st.height = static_cast<int>(cinfo.output_height);
    if (st.width > kMaxDimension || st.height > kMaxDimension) {
        std::snprintf(st.err.message, sizeof st.err.message, "dimensions out of range");
        jpeg_destroy_decompress(&cinfo);
        return false;
    }
    st.rgb.resize(static_cast<std::size_t>(st.width) * st.height * 3);
    while (cinfo.output_scanline < cinfo.output_height) {
        JSAMPROW row = st.rgb.data() + static_cast<std::size_t>(cinfo.output_scanline) * st.width * 3;
        jpeg_read_scanlines(&cinfo, &row, 1);
    }
    jpeg_finish_decompress(&cinfo);
    jpeg_destroy_decompress(&cinfo);
    return true;
}

}  // namespace detail

/// Baseline JPEG of the RGB channels. libjpeg's quality scaling applies
/// (scale = 5000/q below 50, else 200 - 2q; table entries clamped to
/// [1,255]) with 4:2:0 chroma subsampling.
inline Bytes encode_jpeg(const RasterImage& img, int quality) {
    if (quality < 1 || quality > 100) throw ArgumentError("JPEG quality must be in [1,100]");
    std::vector<std::uint8_t> rgb(static_cast<std::size_t>(img.width()) * img.height() * 3);
    const auto px = img.pixels();
    for (std::size_t i = 0, j = 0; i < px.size(); i += 4, j += 3) {
        rgb[j] = px[i];
        rgb[j + 1] = px[i + 1];
        rgb[j + 2] = px[i + 2];
    }
    detail::JpegEncodeState st;
    const bool ok = detail::jpeg_encode_rgb(st, rgb.data(), img.width(), img.height(), quality);
    Bytes out;
    if (ok) out.assign(st.buffer, st.buffer + st.size);
    std::free(st.buffer);
    if (!ok) throw IoError(std::string("JPEG encode failed: ") + st.err.message);
    return out;
}

/// Decode a JPEG into an opaque RGBA image.
inline RasterImage decode_jpeg(const Bytes& data) {
    detail::JpegDecodeState st;
    if (!detail::jpeg_decode_rgb(st, data))
        throw IoError(std::string("JPEG decode failed: ") + st.err.message);
    RasterImage out(st.width, st.height);
    auto px = out.pixels();
    for (std::size_t i = 0, j = 0; j < st.rgb.size(); i += 4, j += 3) {
        px[i] = st.rgb[j];
        px[i + 1] = st.rgb[j + 1];
        px[i + 2] = st.rgb[j + 2];
        px[i + 3] = 255;
    }
    return out;
}

inline bool looks_like_png(const Bytes& d) {
    static constexpr std::uint8_t sig[8] = {0x89, 'P', 'N', 'G', '\r', '\n', 0x1a, '\n'};
    return d.size() >= 8 && std::memcmp(d.data(), sig, 8) == 0;
}

inline bool looks_like_jpeg(const Bytes& d) {
    return d.size() >= 3 && d[0] == 0xff && d[1] == 0xd8 && d[2] == 0xff;
}

/// Load a PNG or JPEG file, sniffing the format from its signature.
inline RasterImage load_image(const std::filesystem::path& path) {
    const Bytes data = read_file(path);
    try {
        if (looks_like_png(data)) return decode_png(data);
        if (looks_like_jpeg(data)) return decode_jpeg(data);
    } catch (const IoError& e) {
        throw IoError(path.string() + ": " + e.what());
    }
    throw IoError(path.string() + ": not a PNG or JPEG file");
}

inline void save_png(const std::filesystem::path& path, const RasterImage& img) {
    const Bytes data = encode_png(img);
    write_file(path, data.data(), data.size());
}

}  // namespace signsynth
