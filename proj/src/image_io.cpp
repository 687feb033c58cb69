#include "biqme/image_io.hpp"

#include <algorithm>
#include <cctype>
#include <string>

#include <opencv2/core.hpp>
#include <opencv2/imgcodecs.hpp>

#include "biqme/error.hpp"

namespace biqme {

namespace {

std::string lower_extension(const std::filesystem::path& path) {
  std::string ext = path.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return ext;
}

}  // namespace

RasterImage read_image(const std::filesystem::path& path) {
  const std::string ext = lower_extension(path);
  if (ext != ".png" && ext != ".bmp" && ext != ".jpg" && ext != ".jpeg")
    throw InvalidArgument("unsupported image format '" + ext + "': " + path.string());
  if (!std::filesystem::exists(path)) throw IoError("no such file: " + path.string());

  cv::Mat m = cv::imread(path.string(), cv::IMREAD_UNCHANGED);
  if (m.empty()) throw IoError("cannot decode image: " + path.string());
  if (m.depth() != CV_8U) throw InvalidArgument("only 8-bit images are supported: " + path.string());

  if (m.channels() != 1 && m.channels() != 2 && m.channels() != 3 && m.channels() != 4)
    throw InvalidArgument("unsupported channel count in " + path.string());
  if (!m.isContinuous()) m = m.clone();

  // OpenCV hands back BGR(A) / gray(+alpha); keep gray or RGB, drop alpha.
  const int src_channels = m.channels();
  const int channels = src_channels <= 2 ? 1 : 3;
  RasterImage img(m.cols, m.rows, channels);
  const std::size_t n = img.pixel_count();
  const std::uint8_t* src = m.data;
  for (std::size_t i = 0; i < n; ++i, src += src_channels) {
    if (channels == 1) {
      img.data[i] = src[0];
    } else {
      img.data[3 * i] = src[2];
      img.data[3 * i + 1] = src[1];
      img.data[3 * i + 2] = src[0];
    }
  }
  return img;
}

void write_image(const std::filesystem::path& path, const RasterImage& img) {
  const std::string ext = lower_extension(path);
  if (ext != ".png" && ext != ".bmp")
    throw InvalidArgument("can only encode .png or .bmp, got '" + ext + "'");
  if (img.data.size() != img.pixel_count() * static_cast<std::size_t>(img.channels))
    throw InvalidArgument("malformed raster");

  cv::Mat bgr(img.height, img.width, img.channels == 1 ? CV_8UC1 : CV_8UC3);
  const std::size_t n = img.pixel_count();
  for (std::size_t i = 0; i < n; ++i) {
    if (img.channels == 1) {
      bgr.data[i] = img.data[i];
    } else {
      bgr.data[3 * i] = img.data[3 * i + 2];
      bgr.data[3 * i + 1] = img.data[3 * i + 1];
      bgr.data[3 * i + 2] = img.data[3 * i];
    }
  }
  if (!cv::imwrite(path.string(), bgr)) throw IoError("cannot write image: " + path.string());
}

}  // namespace biqme
