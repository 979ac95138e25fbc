//! Scenario parameters and the transmit side: precoders, channels, payloads
//! and the received frame `y = sqrt(rho0 * M) * B * s + z`.

mod channel;
mod config;
mod frame;
pub mod modulation;
mod precoding;

pub use channel::{generate_channels, ChannelRealization};
pub use config::{
    db_to_linear, linear_to_db, Correction, Modulation, Normalization, SystemConfig,
};
pub use frame::{
    noiseless_signal, synthesize_frame, synthesize_frame_with, ActiveUser, FrameInstance,
    FrameOptions,
};
pub use modulation::{demodulate, modulate};
pub use precoding::{generate_precoders, PrecoderBank};
