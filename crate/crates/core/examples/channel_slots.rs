// Resolving single slots on the shared channel.
//
// A listener receives a message only when exactly one station broadcasts.
// Silence and collisions look the same, and the weak model forbids
// broadcasting and listening in one slot.

use radio_elect::channel::{resolve_slot, ChannelError, ChannelModel, Message, SlotAction};
use std::error::Error;

pub fn run_example() -> Result<(), Box<dyn Error>> {
    use SlotAction::*;
    let claim = Message::CandidateClaim;

    let lone = [BroadcastAndListen(claim), Listen, Sleep];
    let obs = resolve_slot(&lone, ChannelModel::StrongNoCd)?;
    println!("lone sender:  {obs:?}");

    let collision = [BroadcastAndListen(claim), BroadcastAndListen(claim), Listen];
    let obs = resolve_slot(&collision, ChannelModel::StrongNoCd)?;
    println!("collision:    {obs:?}");

    let silence = [Listen, Listen, Sleep];
    let obs = resolve_slot(&silence, ChannelModel::WeakNoCd)?;
    println!("silence:      {obs:?}");

    match resolve_slot(&lone, ChannelModel::WeakNoCd) {
        Err(ChannelError::IllegalAction { station }) => {
            println!("weak model rejects station {station} broadcasting while listening")
        }
        other => return Err(format!("expected an illegal action, got {other:?}").into()),
    }
    Ok(())
}

fn main() -> Result<(), Box<dyn Error>> {
    run_example()
}
