"""Small raster toolkit: NetPBM I/O, filtering, Canny, contours, corners, hue."""

from dip.imaging.buffer import ImageBuffer
from dip.imaging.canny import EdgeMap, canny
from dip.imaging.color import HueHistogram, back_project, hue_histogram
from dip.imaging.contours import Contour, extract_contours
from dip.imaging.corners import Keypoint, corner_response, detect_keypoints
from dip.imaging.filters import gaussian_blur, sobel_gradients, to_grayscale
from dip.imaging.netpbm import encode_netpbm, load_image, parse_netpbm, save_image

__all__ = [
    "Contour",
    "EdgeMap",
    "HueHistogram",
    "ImageBuffer",
    "Keypoint",
    "back_project",
    "canny",
    "corner_response",
    "detect_keypoints",
    "encode_netpbm",
    "extract_contours",
    "gaussian_blur",
    "hue_histogram",
    "load_image",
    "parse_netpbm",
    "save_image",
    "sobel_gradients",
    "to_grayscale",
]
