//! Losses: camera discriminator cross-entropy, the adversarial generator
//! objectives (gradient reversal, other-camera and all-camera
//! equiprobability) and the within-camera batch-hard triplet loss.

mod camera;
mod scheme;
mod triplet;

pub use camera::{
    ace_loss, discriminator_loss, generator_adversarial_loss, grl_backward, grl_forward, oce_loss,
    AdversarialTerm, LossOutput, LOG_EPS,
};
pub use scheme::Scheme;
pub use triplet::{
    batch_hard_triplet, mine_batch_hard, pairwise_distances, MinedTriplet, TripletConfig,
    TripletOutput,
};
