//! PNG codec for 8-bit grayscale and RGB images.

use std::io::{BufRead, Seek, Write};

use png::{BitDepth, ColorType, Transformations};

use crate::error::{Error, Result};
use crate::image::RasterImage;

fn decoding_error(e: png::DecodingError) -> Error {
    match e {
        png::DecodingError::IoError(io) if io.kind() == std::io::ErrorKind::UnexpectedEof => {
            Error::Malformed(format!("truncated PNG stream: {io}"))
        }
        other => Error::Malformed(format!("PNG: {other}")),
    }
}

pub fn decode<R: BufRead + Seek>(reader: R) -> Result<RasterImage> {
    let mut decoder = png::Decoder::new(reader);
    decoder.set_transformations(Transformations::IDENTITY);
    let mut reader = decoder.read_info().map_err(decoding_error)?;
    let info = reader.info();
    if info.bit_depth != BitDepth::Eight {
        return Err(Error::UnsupportedBitDepth(format!(
            "PNG {:?}",
            info.bit_depth
        )));
    }
    let channels = match info.color_type {
        ColorType::Grayscale => 1,
        ColorType::Rgb => 3,
        other => {
            return Err(Error::UnsupportedFormat(format!(
                "PNG color type {other:?}"
            )))
        }
    };
    let (width, height) = (info.width as usize, info.height as usize);
    let size = reader
        .output_buffer_size()
        .ok_or_else(|| Error::Malformed("PNG too large".into()))?;
    let mut buf = vec![0; size];
    let frame = reader.next_frame(&mut buf).map_err(decoding_error)?;
    buf.truncate(frame.buffer_size());
    RasterImage::new(width, height, channels, buf)
}

pub fn encode<W: Write>(img: &RasterImage, out: W) -> Result<()> {
    let encode_err = |e: png::EncodingError| match e {
        png::EncodingError::IoError(io) => Error::io("<png stream>", io),
        other => Error::Malformed(format!("PNG: {other}")),
    };
    let mut enc = png::Encoder::new(out, img.width() as u32, img.height() as u32);
    enc.set_color(if img.channels() == 1 {
        ColorType::Grayscale
    } else {
        ColorType::Rgb
    });
    enc.set_depth(BitDepth::Eight);
    let mut writer = enc.write_header().map_err(encode_err)?;
    writer.write_image_data(img.samples()).map_err(encode_err)?;
    writer.finish().map_err(encode_err)
}
