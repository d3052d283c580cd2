#include "pano/io.hpp"

#include <png.h>

#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace pano {

namespace {

std::string temp_sibling(const std::string& path) {
    return path + ".tmp";
}

void rename_over(const std::string& tmp, const std::string& path) {
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) {
        std::filesystem::remove(tmp);
        throw std::runtime_error("rename failed for " + path + ": " + ec.message());
    }
}

}  // namespace

void write_file_atomic(const std::string& path, const std::string& contents) {
    const std::string tmp = temp_sibling(path);
    {
        std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
        if (!f) throw std::runtime_error("cannot open " + tmp);
        f.write(contents.data(), static_cast<std::streamsize>(contents.size()));
        if (!f) throw std::runtime_error("write failed for " + tmp);
    }
    rename_over(tmp, path);
}

std::string read_file(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open " + path);
    std::ostringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

void write_pfm(const std::string& path, const Image& img) {
    if (img.channels != 1 && img.channels != 3)
        throw std::invalid_argument("PFM supports 1 or 3 channels");
    std::ostringstream out(std::ios::binary);
    out << (img.channels == 3 ? "PF" : "Pf") << "\n"
        << img.width << " " << img.height << "\n"
        << "-1.0" << "\n";
    // bottom-to-top row order
    for (int v = img.height - 1; v >= 0; --v) {
        const char* row = reinterpret_cast<const char*>(&img.data[img.index(v, 0)]);
        out.write(row, static_cast<std::streamsize>(sizeof(float)) * img.width * img.channels);
    }
    write_file_atomic(path, out.str());
}

Image read_pfm(const std::string& path) {
    const std::string buf = read_file(path);
    std::istringstream in(buf);
    std::string magic;
    int w = 0, h = 0;
    double scale = 0.0;
    in >> magic >> w >> h >> scale;
    if ((magic != "PF" && magic != "Pf") || w <= 0 || h <= 0 || scale == 0.0 || !in)
        throw std::runtime_error("bad PFM header in " + path);
    in.get();  // single whitespace after scale
    const int c = magic == "PF" ? 3 : 1;
    Image img(h, w, c);
    const size_t row_bytes = sizeof(float) * static_cast<size_t>(w) * c;
    const size_t offset = static_cast<size_t>(in.tellg());
    if (buf.size() < offset + row_bytes * h)
        throw std::runtime_error("truncated PFM " + path);
    for (int v = h - 1; v >= 0; --v) {
        std::memcpy(&img.data[img.index(v, 0)],
                    buf.data() + offset + row_bytes * (h - 1 - v), row_bytes);
    }
    if (scale > 0.0) {  // big-endian file
        for (float& f : img.data) {
            uint32_t bits;
            std::memcpy(&bits, &f, 4);
            bits = __builtin_bswap32(bits);
            std::memcpy(&f, &bits, 4);
        }
    }
    return img;
}

namespace {

void write_png_bytes(const std::string& path, const std::vector<uint8_t>& bytes,
                     int h, int w, int channels) {
    int color = PNG_COLOR_TYPE_GRAY;
    if (channels == 3) color = PNG_COLOR_TYPE_RGB;
    if (channels == 4) color = PNG_COLOR_TYPE_RGBA;

    const std::string tmp = temp_sibling(path);
    FILE* fp = std::fopen(tmp.c_str(), "wb");
    if (!fp) throw std::runtime_error("cannot open " + tmp);
    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    png_infop info = png ? png_create_info_struct(png) : nullptr;
    if (!png || !info || setjmp(png_jmpbuf(png))) {
        if (png) png_destroy_write_struct(&png, info ? &info : nullptr);
        std::fclose(fp);
        std::filesystem::remove(tmp);
        throw std::runtime_error("libpng failure writing " + path);
    }
    png_init_io(png, fp);
    png_set_IHDR(png, info, w, h, 8, color, PNG_INTERLACE_NONE,
                 PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
    png_write_info(png, info);
    std::vector<png_bytep> rows(h);
    for (int v = 0; v < h; ++v)
        rows[v] = const_cast<png_bytep>(&bytes[static_cast<size_t>(v) * w * channels]);
    png_write_image(png, rows.data());
    png_write_end(png, nullptr);
    png_destroy_write_struct(&png, &info);
    std::fclose(fp);
    rename_over(tmp, path);
}

}  // namespace

void write_png(const std::string& path, const Image& img, double gamma) {
    std::vector<uint8_t> bytes(img.data.size());
    const double inv_g = gamma > 0.0 ? 1.0 / gamma : 1.0;
    for (size_t i = 0; i < img.data.size(); ++i) {
        double x = std::clamp(static_cast<double>(img.data[i]), 0.0, 1.0);
        if (gamma != 1.0) x = std::pow(x, inv_g);
        bytes[i] = static_cast<uint8_t>(std::lround(x * 255.0));
    }
    write_png_bytes(path, bytes, img.height, img.width, img.channels);
}

void write_mask_png(const std::string& path, const Mask& mask) {
    std::vector<uint8_t> bytes(mask.data.size());
    for (size_t i = 0; i < mask.data.size(); ++i) bytes[i] = mask.data[i] ? 255 : 0;
    write_png_bytes(path, bytes, mask.height, mask.width, 1);
}

Mask read_mask_png(const std::string& path) {
    FILE* fp = std::fopen(path.c_str(), "rb");
    if (!fp) throw std::runtime_error("cannot open " + path);
    png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    png_infop info = png ? png_create_info_struct(png) : nullptr;
    if (!png || !info || setjmp(png_jmpbuf(png))) {
        if (png) png_destroy_read_struct(&png, info ? &info : nullptr, nullptr);
        std::fclose(fp);
        throw std::runtime_error("libpng failure reading " + path);
    }
    png_init_io(png, fp);
    png_read_info(png, info);
    png_set_expand(png);
    png_set_strip_16(png);
    png_set_strip_alpha(png);
    png_set_rgb_to_gray(png, PNG_ERROR_ACTION_NONE, -1, -1);
    png_read_update_info(png, info);
    const int w = static_cast<int>(png_get_image_width(png, info));
    const int h = static_cast<int>(png_get_image_height(png, info));
    std::vector<uint8_t> bytes(static_cast<size_t>(w) * h);
    std::vector<png_bytep> rows(h);
    for (int v = 0; v < h; ++v) rows[v] = &bytes[static_cast<size_t>(v) * w];
    png_read_image(png, rows.data());
    png_destroy_read_struct(&png, &info, nullptr);
    std::fclose(fp);
    Mask m(h, w);
    for (size_t i = 0; i < bytes.size(); ++i) m.data[i] = bytes[i] >= 128 ? 1 : 0;
    return m;
}

}  // namespace pano
