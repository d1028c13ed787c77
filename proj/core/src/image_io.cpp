#include "diver/image_io.hpp"

#include <opencv2/core.hpp>
#include <opencv2/imgcodecs.hpp>

#include <cmath>
#include <stdexcept>

namespace diver::io {

ImagePlanar load_image(const std::string& path) {
  cv::Mat bgr = cv::imread(path, cv::IMREAD_COLOR);
  if (bgr.empty())
    throw std::runtime_error("load_image: cannot read " + path);
  ImagePlanar img(bgr.cols, bgr.rows);
  for (int y = 0; y < bgr.rows; ++y) {
    const auto* row = bgr.ptr<cv::Vec3b>(y);
    for (int x = 0; x < bgr.cols; ++x) {
      img.plane(0).at(x, y) = row[x][2] / 255.0;
      img.plane(1).at(x, y) = row[x][1] / 255.0;
      img.plane(2).at(x, y) = row[x][0] / 255.0;
    }
  }
  return img;
}

void save_image(const std::string& path, const ImagePlanar& img) {
  cv::Mat bgr(img.height(), img.width(), CV_8UC3);
  for (int y = 0; y < img.height(); ++y) {
    auto* row = bgr.ptr<cv::Vec3b>(y);
    for (int x = 0; x < img.width(); ++x) {
      for (int c = 0; c < 3; ++c) {
        const double v = clamp01(img.plane(c).at(x, y));
        row[x][2 - c] = static_cast<unsigned char>(std::lround(v * 255.0));
      }
    }
  }
  if (!cv::imwrite(path, bgr))
    throw std::runtime_error("save_image: cannot write " + path);
}

DepthMap load_depth_png(const std::string& path) {
  cv::Mat raw = cv::imread(path, cv::IMREAD_UNCHANGED);
  if (raw.empty())
    throw std::runtime_error("load_depth_png: cannot read " + path);
  if (raw.channels() != 1)
    throw std::runtime_error("load_depth_png: expected grayscale: " + path);
  DepthMap depth(raw.cols, raw.rows);
  if (raw.depth() == CV_16U) {
    for (int y = 0; y < raw.rows; ++y)
      for (int x = 0; x < raw.cols; ++x)
        depth.plane.at(x, y) = raw.at<std::uint16_t>(y, x) / 65535.0;
  } else if (raw.depth() == CV_8U) {
    for (int y = 0; y < raw.rows; ++y)
      for (int x = 0; x < raw.cols; ++x)
        depth.plane.at(x, y) = raw.at<std::uint8_t>(y, x) / 255.0;
  } else {
    throw std::runtime_error("load_depth_png: unsupported bit depth: " + path);
  }
  return depth;
}

void save_depth_png16(const std::string& path, const DepthMap& depth) {
  cv::Mat raw(depth.height(), depth.width(), CV_16UC1);
  for (int y = 0; y < depth.height(); ++y)
    for (int x = 0; x < depth.width(); ++x) {
      const double v = clamp01(depth.plane.at(x, y));
      raw.at<std::uint16_t>(y, x) =
          static_cast<std::uint16_t>(std::lround(v * 65535.0));
    }
  if (!cv::imwrite(path, raw))
    throw std::runtime_error("save_depth_png16: cannot write " + path);
}

}  // namespace diver::io
